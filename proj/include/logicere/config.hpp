#pragma once

#include <filesystem>
#include <string>

#include "logicere/reasoner.hpp"
#include "logicere/training.hpp"

namespace logicere {

/// Everything a train run needs, loadable from JSON:
///   {"model": {...ModelConfig fields...}, "train": {...TrainConfig fields...}}
/// Both sections are optional; missing fields keep their defaults, unknown keys throw.
struct RunConfig {
    ModelConfig model;
    TrainConfig train;
};

std::string model_config_to_json(const ModelConfig& m);
std::string train_config_to_json(const TrainConfig& t);
std::string run_config_to_json(const RunConfig& c);

/// Throws std::invalid_argument naming the offending key.
ModelConfig model_config_from_json(std::string_view text);
RunConfig run_config_from_json(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// 16 hex digits of FNV-1a over the canonical model JSON. Training options do not enter
/// the hash, so a checkpoint can be evaluated under any training schedule.
std::string config_hash(const ModelConfig& m);

}  // namespace logicere
