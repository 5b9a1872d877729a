#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rwtn/geometry.hpp"
#include "rwtn/grounders.hpp"
#include "rwtn/linalg.hpp"

namespace rwtn::scenes {

struct BoxRecord {
    int id = 0;
    int scene_id = 0;
    Box box;
    Vec scores;           // one entry per class, in class declaration order
    int true_class = 0;   // index into the class list
    std::optional<int> parent;  // id of the whole this box is a part of

    void check() const;
};

struct Scene {
    int id = 0;
    std::vector<BoxRecord> boxes;
    std::vector<std::pair<int, int>> part_of;  // (child id, parent id)
};

struct DatasetSpec {
    int n_whole = 8;
    int n_part = 8;
    grounders::PartWholeTable table;  // empty -> one part class per whole class
    int scenes = 200;
    int wholes_per_scene = 2;
    int parts_per_scene = 2;
    double score_noise = 0.15;
    double geometry_jitter = 0.05;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;

    int classes() const { return n_whole + n_part; }
    void validate() const;
};

/// Whole classes first ("W0".."W<k>"), then part classes ("P0"..).
std::vector<std::string> class_names(const DatasetSpec& spec);

/// w(part i, whole j) = 1 iff i - n_whole == j mod n_whole.
grounders::PartWholeTable default_table(int n_whole, int n_part);

struct Dataset {
    DatasetSpec spec;
    std::vector<std::string> classes;
    grounders::PartWholeTable table;
    std::vector<Scene> train;
    std::vector<Scene> test;
};

/// Generates scenes (parallel across scenes, per-scene derived streams),
/// then splits them 80/20 preserving per-class box proportions.
/// Deterministic per seed. Throws ConfigError on infeasible specs.
Dataset generate(const DatasetSpec& spec);

/// Scores first (class declaration order), then x0, y0, x1, y1.
Vec grounding_vector(const BoxRecord& b);

/// Concatenation of the two grounding vectors, child first.
Vec pair_vector(const BoxRecord& b, const BoxRecord& bp);

/// Writes header.json plus train.jsonl / test.jsonl (one box per line, scene
/// order; byte-stable for a given dataset).
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace rwtn::scenes
