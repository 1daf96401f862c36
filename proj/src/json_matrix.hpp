#pragma once

// JSON helpers shared by the model serializers. Not installed.

#include "daembed/linalg.hpp"

#include <json.hpp>

#include <filesystem>

namespace daembed::detail {

nlohmann::json vector_to_json(const Vector& v);
nlohmann::json matrix_to_json(const Matrix& m);  // array of rows
Vector vector_from_json(const nlohmann::json& j);
Matrix matrix_from_json(const nlohmann::json& j);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace daembed::detail
