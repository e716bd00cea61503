#pragma once

#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "gls_granger/pipeline.hpp"

namespace gls_granger {

namespace detail {

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

}  // namespace detail

/// Writes the graph as `digraph causal { ... }`. Every node is declared, including isolated ones.
inline void write_dot(std::ostream& out, const CausalGraph& graph, const std::string& name = "causal") {
  out << "digraph " << name << " {\n";
  for (const auto& node : graph.nodes) out << "  " << detail::dot_quote(node) << ";\n";
  for (const auto& e : graph.edges) {
    std::ostringstream p;
    p << std::setprecision(6) << e.p_value;
    out << "  " << detail::dot_quote(e.cause) << " -> " << detail::dot_quote(e.effect) << " [pvalue=" << p.str()
        << ", lag=" << e.lag << "];\n";
  }
  out << "}\n";
}

[[nodiscard]] inline std::string to_dot(const CausalGraph& graph) {
  std::ostringstream out;
  write_dot(out, graph);
  return out.str();
}

}  // namespace gls_granger
