#pragma once

// Builtin game families, addressable by short reference strings:
//   games:  "fig1_g1:gamma=<g>", "fig1_g2:gamma=<g>", "example41_g1", "example41_g2"
//   priors: "fig1:gamma=<g>" (uniform over the two fig1 games), "example41"

#include <optional>
#include <string_view>

#include "stacklab/game.hpp"

namespace stacklab {

// u1 = [[16/g, 16/g], [2, 0]], u2 = [[1, -32/g], [0, 2]]
GameMatrix fig1_g1(double gamma);
// u1 = [[1, 0], [0.9, 0.1]], u2 = [[1, -32/g], [0, 2]]
GameMatrix fig1_g2(double gamma);
// Both share u1 = [[1, -1], [0, 2]].
GameMatrix example41_g1();
GameMatrix example41_g2();

Prior fig1_prior(double gamma);
Prior example41_prior();

// gamma = (1 - p) / (1 + p)
double gamma_from_precision(double p_star);

// std::nullopt when the string names no builtin family; throws
// std::invalid_argument when it names one but the parameters are malformed.
std::optional<GameMatrix> builtin_game(std::string_view ref);
std::optional<Prior> builtin_prior(std::string_view ref);

}  // namespace stacklab
