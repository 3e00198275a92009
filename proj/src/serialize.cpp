#include "htrpm/serialize.hpp"

namespace htrpm {

using nlohmann::json;

json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  Eigen::MatrixXd m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const json& data = j.at("data");
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = data[r][c].get<double>();
  }
  return m;
}

json to_json(const DishParams& d) {
  return json{{"beta", to_json(d.beta)},
              {"tau2", d.tau2},
              {"nu_tau", d.nu_tau},
              {"lambda2", to_json(d.lambda2)},
              {"nu_lambda", to_json(d.nu_lambda)}};
}

DishParams dish_from_json(const json& j) {
  DishParams d;
  d.beta = vector_from_json(j.at("beta"));
  d.tau2 = j.at("tau2").get<double>();
  d.nu_tau = j.at("nu_tau").get<double>();
  d.lambda2 = vector_from_json(j.at("lambda2"));
  d.nu_lambda = vector_from_json(j.at("nu_lambda"));
  return d;
}

json to_json(const Draw& d) {
  json betas = json::array();
  for (const auto& b : d.beta) betas.push_back(to_json(b));
  return json{{"iteration", d.iteration}, {"dish", d.dish},
              {"gamma", d.gamma},         {"beta", std::move(betas)},
              {"theta", to_json(d.theta)}, {"eta", to_json(d.eta)},
              {"loglik", d.loglik},        {"n_dishes", d.n_dishes}};
}

Draw draw_from_json(const json& j) {
  Draw d;
  d.iteration = j.at("iteration").get<int>();
  d.dish = j.at("dish").get<std::vector<int>>();
  d.gamma = j.at("gamma").get<std::vector<unsigned char>>();
  for (const auto& b : j.at("beta")) d.beta.push_back(vector_from_json(b));
  d.theta = matrix_from_json(j.at("theta"));
  d.eta = matrix_from_json(j.at("eta"));
  d.loglik = j.at("loglik").get<std::vector<double>>();
  d.n_dishes = j.at("n_dishes").get<int>();
  return d;
}

}  // namespace htrpm
