#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "predictive/asymptotics.hpp"
#include "predictive/ogd.hpp"
#include "predictive/point.hpp"
#include "predictive/rules/species.hpp"

// Points: labels are JSON integers, reals JSON floats, vectors arrays of
// floats and atom tags {"tag": [stream, counter]}.
namespace nlohmann {

template <>
struct adl_serializer<predictive::Point> {
  static void to_json(json& j, const predictive::Point& p) {
    struct V {
      json& j;
      void operator()(const predictive::Label& l) const { j = l.value; }
      void operator()(double x) const { j = x; }
      void operator()(const predictive::RealVector& v) const { j = v; }
      void operator()(const predictive::AtomTag& t) const { j = json{{"tag", {t.stream, t.counter}}}; }
    };
    std::visit(V{j}, p);
  }

  static void from_json(const json& j, predictive::Point& p) {
    if (j.is_number_integer()) {
      p = predictive::Label{j.get<std::int64_t>()};
    } else if (j.is_number_float()) {
      p = j.get<double>();
    } else if (j.is_array()) {
      p = j.get<predictive::RealVector>();
    } else if (j.is_object() && j.contains("tag")) {
      p = predictive::AtomTag{j["tag"].at(0).get<std::uint64_t>(), j["tag"].at(1).get<std::uint64_t>()};
    } else {
      throw predictive::ConfigError("cannot read a point from " + j.dump());
    }
  }
};

}  // namespace nlohmann

namespace predictive {

using Json = nlohmann::json;

inline Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void to_json(Json& j, const LabeledExample& e) { j = Json{{"x", e.x}, {"y", e.y}}; }

inline void from_json(const Json& j, LabeledExample& e) {
  e.x = j.at("x").get<RealVector>();
  e.y = j.contains("y") ? j.at("y").get<int>() : 0;
}

inline void to_json(Json& j, const PartitionCounts& c) { j = c.sizes(); }

inline void from_json(const Json& j, PartitionCounts& c) { c = PartitionCounts(j.get<std::vector<std::size_t>>()); }

inline void to_json(Json& j, const UpdateAccumulator& a) {
  j = Json{{"n", a.n}, {"previous", a.previous}, {"sum", a.sum}};
}

inline void from_json(const Json& j, UpdateAccumulator& a) {
  a.n = j.at("n").get<std::size_t>();
  a.previous = j.at("previous").get<std::vector<double>>();
  a.sum = j.at("sum").get<std::vector<double>>();
  if (a.previous.empty() || a.sum.size() != a.previous.size() * a.previous.size())
    throw ConfigError("accumulator checkpoint has inconsistent dimensions");
}

/// {"center": [...], "covariance": [row-major], "dim": k, "n": n, "singular": bool}
inline void to_json(Json& j, const GaussianApprox& g) {
  std::vector<double> cov;
  for (Eigen::Index r = 0; r < g.covariance.rows(); ++r)
    for (Eigen::Index c = 0; c < g.covariance.cols(); ++c) cov.push_back(g.covariance(r, c));
  j = Json{{"center", std::vector<double>(g.center.data(), g.center.data() + g.center.size())},
           {"covariance", cov},
           {"dim", g.center.size()},
           {"n", g.n},
           {"singular", g.singular}};
}

inline void from_json(const Json& j, GaussianApprox& g) {
  const auto center = j.at("center").get<std::vector<double>>();
  const auto cov = j.at("covariance").get<std::vector<double>>();
  const auto k = static_cast<Eigen::Index>(center.size());
  if (cov.size() != center.size() * center.size()) throw ConfigError("gaussian approximation: bad covariance size");
  g.center = Eigen::Map<const Eigen::VectorXd>(center.data(), k);
  g.covariance = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(cov.data(), k, k);
  g.n = j.at("n").get<std::size_t>();
  g.singular = j.value("singular", false);
}

inline void to_json(Json& j, const Interval& i) {
  j = Json{{"center", i.center}, {"lo", i.lo}, {"hi", i.hi}, {"v", i.v}, {"degenerate", i.degenerate}};
}

inline const char* to_string(OgdLoss l) { return l == OgdLoss::quadratic ? "quadratic" : "cross_entropy"; }

/// Checkpoint of a stream: beta, n and the accumulator (bit-exact round trip).
inline void to_json(Json& j, const OgdState& s) {
  j = Json{{"beta", s.beta}, {"n", s.n}, {"accumulator", s.acc}, {"loss_scale", s.loss_scale}, {"loss", to_string(s.loss)}};
}

inline void from_json(const Json& j, OgdState& s) {
  s.beta = j.at("beta").get<std::vector<double>>();
  s.n = j.at("n").get<std::size_t>();
  s.acc = j.at("accumulator").get<UpdateAccumulator>();
  s.loss_scale = j.at("loss_scale").get<double>();
  const auto loss = j.value("loss", std::string("cross_entropy"));
  if (loss != "cross_entropy" && loss != "quadratic") throw ConfigError("unknown loss '" + loss + "' in checkpoint");
  s.loss = loss == "quadratic" ? OgdLoss::quadratic : OgdLoss::cross_entropy;
  if (s.beta.empty() || s.acc.dim() != s.beta.size() || s.acc.n != s.n)
    throw ConfigError("ogd checkpoint is inconsistent");
}

}  // namespace predictive
