#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rwtn/sii.hpp"
#include "rwtn/training.hpp"

namespace rwtn::serialize {

/// ltn / rwtn checkpoints: everything in <dir>/model.json (a joint rwtn model
/// stores one encoder copy per predicate: no sharing, as the space accounting
/// assumes), plus <dir>/trace.csv.
void save_model(const std::filesystem::path& dir, const sii::SiiModel& model,
                const training::TrainConfig& cfg, const training::TrainResult& result);

/// rwtn-shared checkpoints: <dir>/model.json manifest, one <dir>/encoder.json,
/// per-class <dir>/decoder_<class>.json and <dir>/trace_<class>.csv.
void save_model_shared(const std::filesystem::path& dir, const sii::SiiModel& model,
                       const training::TrainConfig& cfg,
                       const std::vector<std::pair<std::string, training::TrainResult>>& per_class);

struct LoadedModel {
    sii::SiiModel model;
    training::TrainConfig cfg;
    std::vector<training::TraceRow> trace;  // single-model runs only
};

/// Rebuilds grounders bit-exactly (doubles round-trip through JSON losslessly).
LoadedModel load_model(const std::filesystem::path& dir);

/// Number of serialized model weights (encoder + learnable), excluding
/// optimizer state and traces.
std::size_t count_stored_weights(const std::filesystem::path& dir);

std::string encoder_hash_hex(const grounders::RwtnEncoderParams& enc);

void write_trace_csv(const std::vector<training::TraceRow>& trace, std::ostream& out);

}  // namespace rwtn::serialize
