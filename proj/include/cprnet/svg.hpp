#pragma once

#include <string>

#include "cprnet/egta.hpp"

namespace cprnet {

// Self-contained SVG (no external assets). Cooperator payoffs in green,
// defector in red, the all-agent average in blue (total parameterisation
// only), equilibria as shaded ovals, and the SSD indicator inset as three
// signed horizontal bars.
std::string schelling_svg(const MetaGameTable& table, const SSDReport* ssd,
                          const EquilibriumSet* equilibria, const std::string& title);

std::string heatmap_svg(const Heatmap& heatmap, const std::string& title);

}  // namespace cprnet
