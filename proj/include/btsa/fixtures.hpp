#pragma once

#include <string>

#include "btsa/system.hpp"

namespace btsa {

/// Four-hour single-node dispatch case: demand 170.2, 176, 281.7, 391 MW,
/// wind availability 40, 5, 15.7, 20 MW, costs 3 / 24 / 5000. With `ramping`
/// the thermal unit gets RU = RD = 100 MW/h.
SynthCase table_case(bool ramping);

/// Single-node ED case with one hour per character of `pattern`:
/// 'W' wind on the margin, 'T' thermal on the margin, 'N' non-supplied power.
/// Every hour sits strictly inside its regime, so each regime has a unique
/// dual vector. Throws std::invalid_argument on other characters.
SynthCase regime_case(const std::string& pattern = "WWTWWNWWTWWW");

}  // namespace btsa
