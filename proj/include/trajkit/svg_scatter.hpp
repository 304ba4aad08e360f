#pragma once

#include "trajkit/profiles.hpp"
#include "trajkit/tsne.hpp"

#include <array>
#include <string>
#include <vector>

namespace trajkit {

/// Fixed categorical palette; tier rank r uses color r mod 8.
extern const std::array<const char*, 8> kScatterPalette;

/// Standalone SVG scatter of an embedding, one circle per child, filled
/// by tier, with a legend of tier names. Byte output is deterministic
/// for identical inputs.
std::string scatter_svg(const Embedding2D& embedding, const std::vector<int>& tier_ranks,
                        const std::vector<TierLabel>& tiers);

void emit_scatter_svg(const Embedding2D& embedding, const std::vector<int>& tier_ranks,
                      const std::vector<TierLabel>& tiers, const std::string& path);

} // namespace trajkit
