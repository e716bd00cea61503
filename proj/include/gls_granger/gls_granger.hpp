#pragma once

#include "gls_granger/error.hpp"
#include "gls_granger/time_series.hpp"
#include "gls_granger/numerics.hpp"
#include "gls_granger/autocovariance.hpp"
#include "gls_granger/regression.hpp"
#include "gls_granger/inference.hpp"
#include "gls_granger/parallel.hpp"
#include "gls_granger/pipeline.hpp"
#include "gls_granger/simulation.hpp"
#include "gls_granger/bench.hpp"
#include "gls_granger/dataset.hpp"
#include "gls_granger/dot.hpp"
