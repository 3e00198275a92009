#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "htrpm/state.hpp"

namespace htrpm {

nlohmann::json to_json(const Eigen::VectorXd& v);
nlohmann::json to_json(const Eigen::MatrixXd& m);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DishParams& d);
DishParams dish_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Draw& d);
Draw draw_from_json(const nlohmann::json& j);

}  // namespace htrpm
