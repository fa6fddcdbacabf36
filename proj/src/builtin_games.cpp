#include "stacklab/builtin_games.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stacklab {
namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("gamma must be positive and finite");
  }
}

std::string gamma_suffix(double gamma) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), gamma);
  return ":gamma=" + std::string(buf, res.ptr);
}

// Splits "family:gamma=<g>" and returns gamma if the family matches.
std::optional<double> parse_gamma_ref(std::string_view ref, std::string_view family) {
  if (ref.substr(0, family.size()) != family) return std::nullopt;
  std::string_view rest = ref.substr(family.size());
  if (rest.empty() || rest[0] != ':') return std::nullopt;
  rest.remove_prefix(1);
  constexpr std::string_view key = "gamma=";
  if (rest.substr(0, key.size()) != key) {
    throw std::invalid_argument("expected '" + std::string(family) + ":gamma=<value>', got '" +
                                std::string(ref) + "'");
  }
  rest.remove_prefix(key.size());
  double gamma = 0.0;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), gamma);
  if (ec != std::errc() || ptr != rest.data() + rest.size()) {
    throw std::invalid_argument("malformed gamma in '" + std::string(ref) + "'");
  }
  check_gamma(gamma);
  return gamma;
}

}  // namespace

GameMatrix fig1_g1(double gamma) {
  check_gamma(gamma);
  return GameMatrix("fig1_g1" + gamma_suffix(gamma),
                    Matrix::from_rows({{16.0 / gamma, 16.0 / gamma}, {2.0, 0.0}}),
                    Matrix::from_rows({{1.0, -32.0 / gamma}, {0.0, 2.0}}));
}

GameMatrix fig1_g2(double gamma) {
  check_gamma(gamma);
  return GameMatrix("fig1_g2" + gamma_suffix(gamma),
                    Matrix::from_rows({{1.0, 0.0}, {0.9, 0.1}}),
                    Matrix::from_rows({{1.0, -32.0 / gamma}, {0.0, 2.0}}));
}

GameMatrix example41_g1() {
  return GameMatrix("example41_g1", Matrix::from_rows({{1.0, -1.0}, {0.0, 2.0}}),
                    Matrix::from_rows({{1.0, 5.0}, {2.0, 5.0}}));
}

GameMatrix example41_g2() {
  return GameMatrix("example41_g2", Matrix::from_rows({{1.0, -1.0}, {0.0, 2.0}}),
                    Matrix::from_rows({{3.0, 0.0}, {7.0, 8.0}}));
}

Prior fig1_prior(double gamma) {
  return Prior({{fig1_g1(gamma), 0.5}, {fig1_g2(gamma), 0.5}});
}

Prior example41_prior() {
  return Prior({{example41_g1(), 0.5}, {example41_g2(), 0.5}});
}

double gamma_from_precision(double p_star) {
  if (!(p_star >= 0.0 && p_star < 1.0)) {
    throw std::invalid_argument("p_star must lie in [0, 1)");
  }
  return (1.0 - p_star) / (1.0 + p_star);
}

std::optional<GameMatrix> builtin_game(std::string_view ref) {
  if (ref == "example41_g1") return example41_g1();
  if (ref == "example41_g2") return example41_g2();
  if (auto g = parse_gamma_ref(ref, "fig1_g1")) return fig1_g1(*g);
  if (auto g = parse_gamma_ref(ref, "fig1_g2")) return fig1_g2(*g);
  return std::nullopt;
}

std::optional<Prior> builtin_prior(std::string_view ref) {
  if (ref == "example41") return example41_prior();
  if (auto g = parse_gamma_ref(ref, "fig1")) return fig1_prior(*g);
  return std::nullopt;
}

}  // namespace stacklab
