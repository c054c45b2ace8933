#pragma once

#include <json.hpp>

#include <vector>

#include "moolab/lifting.hpp"
#include "moolab/min_norm.hpp"
#include "moolab/polynomials.hpp"
#include "moolab/quadratic.hpp"

namespace moolab {

// JSON schemas. Doubles survive a round trip bit-exactly: nlohmann emits
// the shortest decimal that parses back to the same value.

template <typename Scalar>
nlohmann::json to_json(const Vector<Scalar>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

template <typename Scalar>
Vector<Scalar> vector_from_json(const nlohmann::json& a) {
  Vector<Scalar> v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Index>(i)] = a[i].get<Scalar>();
  return v;
}

template <typename Scalar>
nlohmann::json to_json(const SpectralQuadratic<Scalar>& g) {
  return {{"eigs", to_json(g.eigs())},
          {"e0", to_json(g.e0())},
          {"mu", g.mu_bound()},
          {"L", g.L_bound()}};
}

template <typename Scalar>
SpectralQuadratic<Scalar> spectral_quadratic_from_json(const nlohmann::json& j) {
  return SpectralQuadratic<Scalar>(vector_from_json<Scalar>(j.at("eigs")),
                                   vector_from_json<Scalar>(j.at("e0")),
                                   j.at("mu").get<Scalar>(), j.at("L").get<Scalar>());
}

template <typename Scalar>
nlohmann::json to_json(const MooLiftedInstance<Scalar>& inst) {
  nlohmann::json anchors = nlohmann::json::array();
  for (Index i = 0; i < inst.m(); ++i)
    anchors.push_back(to_json(Vector<Scalar>(inst.anchors().col(i))));
  nlohmann::json j = to_json(inst.quadratic());
  j["anchors"] = std::move(anchors);
  j["gamma"] = inst.gamma();
  return j;
}

template <typename Scalar>
MooLiftedInstance<Scalar> lifted_instance_from_json(const nlohmann::json& j) {
  SpectralQuadratic<Scalar> g = spectral_quadratic_from_json<Scalar>(j);
  const auto& anchors_json = j.at("anchors");
  require(!anchors_json.empty(), "lifted instance JSON: empty anchors");
  Matrix<Scalar> anchors(static_cast<Index>(anchors_json.front().size()),
                         static_cast<Index>(anchors_json.size()));
  for (std::size_t i = 0; i < anchors_json.size(); ++i)
    anchors.col(static_cast<Index>(i)) = vector_from_json<Scalar>(anchors_json[i]);
  const Scalar gamma = j.at("gamma").get<Scalar>();
  const bool strongly_convex = g.mu_bound() > Scalar(0);
  MooLiftedInstance<Scalar> inst(std::move(g), std::move(anchors), strongly_convex);
  require(inst.gamma() == gamma, "lifted instance JSON: gamma inconsistent with mu/L");
  return inst;
}

template <typename Scalar>
nlohmann::json to_json(const GapCertificate<Scalar>& cert) {
  nlohmann::json j = {{"gap", cert.gap},
                      {"lambda", to_json(cert.weights.lambda)},
                      {"d", to_json(cert.min_point)}};
  j["v"] = cert.descent_dir ? to_json(*cert.descent_dir) : nlohmann::json();
  return j;
}

/// Polynomials serialize as their coefficient array, lowest degree first.
template <typename Scalar>
nlohmann::json to_json(const ResidualPolynomial<Scalar>& p) {
  return to_json(p.coeffs);
}

template <typename Scalar>
ResidualPolynomial<Scalar> residual_polynomial_from_json(const nlohmann::json& j) {
  return ResidualPolynomial<Scalar>(vector_from_json<Scalar>(j));
}

}  // namespace moolab
