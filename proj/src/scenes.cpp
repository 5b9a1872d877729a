#include "rwtn/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "rwtn/parallel.hpp"
#include "rwtn/rng.hpp"

namespace rwtn::scenes {

using nlohmann::json;

void BoxRecord::check() const {
    if (!(box.x0 < box.x1 && box.y0 < box.y1))
        throw DataError("box record " + std::to_string(id) + ": degenerate geometry");
    if (!all_finite(scores)) throw DataError("box record " + std::to_string(id) + ": non-finite scores");
}

void DatasetSpec::validate() const {
    if (n_whole < 1) throw ConfigError("dataset: need at least one whole class");
    if (n_part < 0) throw ConfigError("dataset: negative part class count");
    if (scenes < 1) throw ConfigError("dataset: need at least one scene");
    if (wholes_per_scene < 1) throw ConfigError("dataset: need at least one whole per scene");
    if (parts_per_scene < 0) throw ConfigError("dataset: negative parts per scene");
    if (parts_per_scene > 0 && n_part < 1)
        throw ConfigError("dataset: parts per scene > 0 but no part classes");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("dataset: train fraction must be in (0, 1)");
    if (score_noise < 0.0 || geometry_jitter < 0.0)
        throw ConfigError("dataset: noise and jitter must be >= 0");
    const int train_n = static_cast<int>(std::lround(train_fraction * scenes));
    if (train_n < 1 || train_n >= scenes)
        throw ConfigError("dataset: split leaves an empty train or test side");
}

std::vector<std::string> class_names(const DatasetSpec& spec) {
    std::vector<std::string> names;
    for (int i = 0; i < spec.n_whole; ++i) names.push_back("W" + std::to_string(i));
    for (int i = 0; i < spec.n_part; ++i) names.push_back("P" + std::to_string(i));
    return names;
}

grounders::PartWholeTable default_table(int n_whole, int n_part) {
    grounders::PartWholeTable t(static_cast<std::size_t>(n_whole + n_part));
    for (int p = 0; p < n_part; ++p) t.set(n_whole + p, p % n_whole);
    return t;
}

namespace {

Scene generate_scene(const DatasetSpec& spec, const grounders::PartWholeTable& table, int idx) {
    RngStream s = RngStream::keyed(spec.seed, {RngStream::fnv1a("scene"), static_cast<std::uint64_t>(idx)});
    Scene scene;
    scene.id = idx;
    const int per_scene = spec.wholes_per_scene + spec.parts_per_scene;

    auto make_scores = [&](int cls) {
        Vec scores(spec.classes(), 0.0);
        scores[cls] = 1.0;
        if (spec.score_noise > 0.0)
            for (double& v : scores) v = std::clamp(v + spec.score_noise * s.normal(), 0.0, 1.0);
        return scores;
    };

    for (int j = 0; j < spec.wholes_per_scene; ++j) {
        BoxRecord b;
        b.id = idx * per_scene + j;
        b.scene_id = idx;
        b.true_class = static_cast<int>(s.below(spec.n_whole));
        // Wholes never overlap: nesting evidence stays unambiguous (a part
        // sits inside exactly one whole). Shrink until a free spot exists.
        double scale = 1.0;
        for (;;) {
            const double w = scale * s.uniform(0.25, 0.45);
            const double h = scale * s.uniform(0.25, 0.45);
            Box candidate;
            candidate.x0 = s.uniform(0.0, 1.0 - w);
            candidate.y0 = s.uniform(0.0, 1.0 - h);
            candidate.x1 = candidate.x0 + w;
            candidate.y1 = candidate.y0 + h;
            bool clear = true;
            for (const BoxRecord& other : scene.boxes)
                if (intersection_area(candidate, other.box) > 0.0) clear = false;
            if (clear) {
                b.box = candidate;
                break;
            }
            scale *= 0.95;
            if (scale < 0.05)
                throw ConfigError("dataset: cannot place non-overlapping wholes; "
                                  "reduce wholes per scene");
        }
        b.scores = make_scores(b.true_class);
        scene.boxes.push_back(std::move(b));
    }

    for (int j = 0; j < spec.parts_per_scene; ++j) {
        // Pick a host whole that has at least one compatible part class.
        std::vector<int> hosts;
        for (int wi = 0; wi < spec.wholes_per_scene; ++wi) {
            const int wcls = scene.boxes[wi].true_class;
            for (int c = 0; c < spec.classes(); ++c)
                if (table.at(c, wcls)) {
                    hosts.push_back(wi);
                    break;
                }
        }
        if (hosts.empty())
            throw ConfigError("dataset: no whole class in scene admits parts (check the table)");
        const BoxRecord& parent = scene.boxes[hosts[s.below(hosts.size())]];

        std::vector<int> compat;
        for (int c = 0; c < spec.classes(); ++c)
            if (table.at(c, parent.true_class)) compat.push_back(c);

        BoxRecord b;
        b.id = idx * per_scene + spec.wholes_per_scene + j;
        b.scene_id = idx;
        b.true_class = compat[s.below(compat.size())];
        b.parent = parent.id;
        const double pw = (parent.box.x1 - parent.box.x0) * s.uniform(0.25, 0.5);
        const double ph = (parent.box.y1 - parent.box.y0) * s.uniform(0.25, 0.5);
        const double bx = s.uniform(parent.box.x0, parent.box.x1 - pw);
        const double by = s.uniform(parent.box.y0, parent.box.y1 - ph);
        double dx = spec.geometry_jitter * pw * s.uniform(-1.0, 1.0);
        double dy = spec.geometry_jitter * ph * s.uniform(-1.0, 1.0);
        // Shrink the jitter until the nesting invariant ir >= 0.9 holds;
        // dx = dy = 0 satisfies it, so this terminates.
        for (;;) {
            Box candidate{bx + dx, by + dy, bx + dx + pw, by + dy + ph};
            if (candidate.x0 >= 0.0 && candidate.y0 >= 0.0 && candidate.x1 <= 1.0 &&
                candidate.y1 <= 1.0 && inclusion_ratio(candidate, parent.box) >= 0.9) {
                b.box = candidate;
                break;
            }
            dx *= 0.5;
            dy *= 0.5;
            if (std::abs(dx) < 1e-12 && std::abs(dy) < 1e-12) {
                b.box = Box{bx, by, bx + pw, by + ph};
                break;
            }
        }
        b.scores = make_scores(b.true_class);
        scene.boxes.push_back(std::move(b));
    }

    for (const BoxRecord& b : scene.boxes)
        if (b.parent) scene.part_of.emplace_back(b.id, *b.parent);
    return scene;
}

// Stratified split: stride-sample the test quota, then swap scenes between
// the sides while doing so shrinks the per-class deviation from the target
// train fractions. Fully deterministic (fixed scan order, strict gains).
void split_scenes(std::vector<Scene> all, double fraction, std::vector<Scene>* train,
                  std::vector<Scene>* test) {
    const int n = static_cast<int>(all.size());
    const int train_quota = static_cast<int>(std::lround(fraction * n));
    std::size_t nclasses = 0;
    for (const Scene& s : all)
        for (const BoxRecord& b : s.boxes)
            nclasses = std::max(nclasses, static_cast<std::size_t>(b.true_class) + 1);

    std::vector<double> totals(nclasses, 0.0);
    std::vector<std::vector<int>> counts(n, std::vector<int>(nclasses, 0));
    for (int i = 0; i < n; ++i)
        for (const BoxRecord& b : all[i].boxes) {
            totals[b.true_class] += 1.0;
            counts[i][b.true_class] += 1;
        }

    std::vector<char> in_train(n, 0);
    int assigned = 0;
    for (int i = 0; i < n && assigned < train_quota; ++i) {
        // Spread train picks evenly over the scene order.
        if (static_cast<int>(std::floor((i + 1) * fraction)) >
            static_cast<int>(std::floor(i * fraction))) {
            in_train[i] = 1;
            ++assigned;
        }
    }
    for (int i = 0; i < n && assigned < train_quota; ++i)
        if (!in_train[i]) in_train[i] = 1, ++assigned;

    std::vector<double> train_counts(nclasses, 0.0);
    for (int i = 0; i < n; ++i)
        if (in_train[i])
            for (std::size_t c = 0; c < nclasses; ++c) train_counts[c] += counts[i][c];

    auto cost = [&](const std::vector<double>& tc) {
        double d = 0.0;
        for (std::size_t c = 0; c < nclasses; ++c) d += std::abs(tc[c] - fraction * totals[c]);
        return d;
    };

    double current = cost(train_counts);
    for (int pass = 0; pass < 64; ++pass) {
        int best_a = -1, best_b = -1;
        double best_cost = current - 1e-12;
        std::vector<double> candidate(nclasses);
        for (int a = 0; a < n; ++a) {
            if (!in_train[a]) continue;
            for (int b = 0; b < n; ++b) {
                if (in_train[b]) continue;
                for (std::size_t c = 0; c < nclasses; ++c)
                    candidate[c] = train_counts[c] - counts[a][c] + counts[b][c];
                const double d = cost(candidate);
                if (d < best_cost) {
                    best_cost = d;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        if (best_a < 0) break;
        in_train[best_a] = 0;
        in_train[best_b] = 1;
        for (std::size_t c = 0; c < nclasses; ++c)
            train_counts[c] += counts[best_b][c] - counts[best_a][c];
        current = best_cost;
    }

    for (int i = 0; i < n; ++i)
        (in_train[i] ? train : test)->push_back(std::move(all[i]));
}

}  // namespace

Dataset generate(const DatasetSpec& spec) {
    spec.validate();
    Dataset ds;
    ds.spec = spec;
    ds.classes = class_names(spec);
    ds.table = spec.table.size ? spec.table : default_table(spec.n_whole, spec.n_part);
    ds.table.validate();
    if (ds.table.size != static_cast<std::size_t>(spec.classes()))
        throw ConfigError("dataset: table size does not match class count");

    std::vector<Scene> all(spec.scenes);
    const grounders::PartWholeTable& table = ds.table;
    parallel_for(spec.scenes, [&](std::int64_t i) {
        all[i] = generate_scene(spec, table, static_cast<int>(i));
    });
    split_scenes(std::move(all), spec.train_fraction, &ds.train, &ds.test);
    return ds;
}

Vec grounding_vector(const BoxRecord& b) {
    Vec v = b.scores;
    v.push_back(b.box.x0);
    v.push_back(b.box.y0);
    v.push_back(b.box.x1);
    v.push_back(b.box.y1);
    return v;
}

Vec pair_vector(const BoxRecord& b, const BoxRecord& bp) {
    Vec v = grounding_vector(b);
    const Vec w = grounding_vector(bp);
    v.insert(v.end(), w.begin(), w.end());
    return v;
}

namespace {

json table_to_json(const grounders::PartWholeTable& t) {
    json rows = json::array();
    for (std::size_t i = 0; i < t.size; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < t.size; ++j) row.push_back(static_cast<int>(t.at(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

grounders::PartWholeTable table_from_json(const json& rows) {
    grounders::PartWholeTable t(rows.size());
    for (std::size_t i = 0; i < t.size; ++i)
        for (std::size_t j = 0; j < t.size; ++j)
            if (rows[i][j].get<int>()) t.set(i, j);
    return t;
}

void write_scenes(const std::vector<Scene>& scenes, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write " + file.string());
    for (const Scene& s : scenes) {
        for (const BoxRecord& b : s.boxes) {
            json j{{"scene", b.scene_id},
                   {"id", b.id},
                   {"class", b.true_class},
                   {"parent", b.parent ? json(*b.parent) : json(nullptr)},
                   {"scores", b.scores},
                   {"box", {b.box.x0, b.box.y0, b.box.x1, b.box.y1}}};
            out << j.dump() << '\n';
        }
    }
}

std::vector<Scene> read_scenes(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot read " + file.string());
    std::vector<Scene> scenes;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        BoxRecord b;
        b.scene_id = j.at("scene").get<int>();
        b.id = j.at("id").get<int>();
        b.true_class = j.at("class").get<int>();
        if (!j.at("parent").is_null()) b.parent = j.at("parent").get<int>();
        b.scores = j.at("scores").get<Vec>();
        const auto& box = j.at("box");
        b.box = Box{box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
                    box[3].get<double>()};
        b.check();
        if (scenes.empty() || scenes.back().id != b.scene_id) {
            Scene s;
            s.id = b.scene_id;
            scenes.push_back(std::move(s));
        }
        scenes.back().boxes.push_back(std::move(b));
    }
    for (Scene& s : scenes)
        for (const BoxRecord& b : s.boxes)
            if (b.parent) s.part_of.emplace_back(b.id, *b.parent);
    return scenes;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json header{{"format", "rwtn-dataset/1"},
                {"classes", ds.classes},
                {"n_whole", ds.spec.n_whole},
                {"n_part", ds.spec.n_part},
                {"table", table_to_json(ds.table)},
                {"scenes", ds.spec.scenes},
                {"wholes_per_scene", ds.spec.wholes_per_scene},
                {"parts_per_scene", ds.spec.parts_per_scene},
                {"score_noise", ds.spec.score_noise},
                {"geometry_jitter", ds.spec.geometry_jitter},
                {"train_fraction", ds.spec.train_fraction},
                {"seed", ds.spec.seed}};
    std::ofstream out(dir / "header.json", std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / "header.json").string());
    out << header.dump(2) << '\n';
    write_scenes(ds.train, dir / "train.jsonl");
    write_scenes(ds.test, dir / "test.jsonl");
}

Dataset load_dataset(const std::filesystem::path& dir) {
    std::ifstream in(dir / "header.json", std::ios::binary);
    if (!in) throw DataError("cannot read " + (dir / "header.json").string());
    json header;
    try {
        in >> header;
    } catch (const json::exception& e) {
        throw DataError("header.json: " + std::string(e.what()));
    }
    Dataset ds;
    ds.spec.n_whole = header.at("n_whole").get<int>();
    ds.spec.n_part = header.at("n_part").get<int>();
    ds.spec.scenes = header.at("scenes").get<int>();
    ds.spec.wholes_per_scene = header.at("wholes_per_scene").get<int>();
    ds.spec.parts_per_scene = header.at("parts_per_scene").get<int>();
    ds.spec.score_noise = header.at("score_noise").get<double>();
    ds.spec.geometry_jitter = header.at("geometry_jitter").get<double>();
    ds.spec.train_fraction = header.at("train_fraction").get<double>();
    ds.spec.seed = header.at("seed").get<std::uint64_t>();
    ds.classes = header.at("classes").get<std::vector<std::string>>();
    ds.table = table_from_json(header.at("table"));
    ds.spec.table = ds.table;
    ds.train = read_scenes(dir / "train.jsonl");
    ds.test = read_scenes(dir / "test.jsonl");
    return ds;
}

}  // namespace rwtn::scenes
