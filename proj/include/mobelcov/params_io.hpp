#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "mobelcov/epi_core.hpp"

namespace mobelcov {

/// Everything the compartmental model needs, as read from a parameter file.
struct ModelParameters {
    AgeStructure ages;
    EpiParams epi;
    ContactMatrixSet contacts;

    void validate() const;
};

ModelParameters parse_model_parameters(const nlohmann::json& doc);
ModelParameters load_model_parameters(const std::filesystem::path& path);
nlohmann::json to_json(const ModelParameters& params);

}  // namespace mobelcov
