#include "rwtn/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rwtn/format.hpp"

namespace rwtn::serialize {

using nlohmann::json;

namespace {

json mat_to_json(const Mat& m) {
    return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.a}};
}

Mat mat_from_json(const json& j) {
    Mat m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    m.a = j.at("data").get<Vec>();
    if (m.a.size() != m.rows * m.cols) throw DataError("model file: matrix size mismatch");
    return m;
}

json tensor_to_json(const Tensor3& t) {
    json slices = json::array();
    for (const Mat& s : t.slices) slices.push_back(s.a);
    return json{{"k", t.order()}, {"dim", t.dim()}, {"slices", std::move(slices)}};
}

Tensor3 tensor_from_json(const json& j) {
    Tensor3 t(j.at("k").get<std::size_t>(), j.at("dim").get<std::size_t>());
    const json& slices = j.at("slices");
    if (slices.size() != t.order()) throw DataError("model file: tensor slice count mismatch");
    for (std::size_t i = 0; i < t.order(); ++i) {
        t.slices[i].a = slices[i].get<Vec>();
        if (t.slices[i].a.size() != t.dim() * t.dim())
            throw DataError("model file: tensor slice size mismatch");
    }
    return t;
}

json ltn_to_json(const grounders::LtnPredicateParams& p) {
    return json{{"W", tensor_to_json(p.W)}, {"V", mat_to_json(p.V)}, {"b", p.b}, {"u", p.u}};
}

grounders::LtnPredicateParams ltn_from_json(const json& j) {
    grounders::LtnPredicateParams p;
    p.W = tensor_from_json(j.at("W"));
    p.V = mat_from_json(j.at("V"));
    p.b = j.at("b").get<Vec>();
    p.u = j.at("u").get<Vec>();
    p.check();
    return p;
}

json decoder_to_json(const grounders::RwtnDecoderParams& d) {
    return json{{"u", mat_to_json(d.u)}, {"k_out", d.k_out}};
}

grounders::RwtnDecoderParams decoder_from_json(const json& j) {
    grounders::RwtnDecoderParams d;
    d.u = mat_from_json(j.at("u"));
    d.k_out = j.at("k_out").get<Vec>();
    return d;
}

json encoder_to_json(const grounders::RwtnEncoderParams& e) {
    return json{{"W_res", tensor_to_json(e.W_res)}, {"V_in", mat_to_json(e.V_in)},
                {"xi", e.xi},                       {"seed", e.seed},
                {"hash", encoder_hash_hex(e)}};
}

grounders::RwtnEncoderParams encoder_from_json(const json& j) {
    grounders::RwtnEncoderParams e;
    e.W_res = tensor_from_json(j.at("W_res"));
    e.V_in = mat_from_json(j.at("V_in"));
    e.xi = j.at("xi").get<double>();
    e.seed = j.at("seed").get<std::uint64_t>();
    return e;
}

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

json hyper_to_json(const sii::ModelHyper& h) {
    return json{{"k", h.k},
                {"t", h.t},
                {"rho", h.reservoir.rho},
                {"beta", h.reservoir.beta},
                {"R", h.reservoir.R},
                {"omega", h.reservoir.omega},
                {"xi", h.reservoir.xi},
                {"init_stddev", h.init_stddev},
                {"th", h.th}};
}

sii::ModelHyper hyper_from_json(const json& j) {
    sii::ModelHyper h;
    h.k = j.at("k").get<std::size_t>();
    h.t = j.at("t").get<std::size_t>();
    h.reservoir.rho = j.at("rho").get<double>();
    h.reservoir.beta = j.at("beta").get<double>();
    h.reservoir.R = j.at("R").get<int>();
    h.reservoir.omega = j.at("omega").get<double>();
    h.reservoir.xi = j.at("xi").get<double>();
    h.init_stddev = j.at("init_stddev").get<double>();
    h.th = j.at("th").get<double>();
    return h;
}

json train_cfg_to_json(const training::TrainConfig& c) {
    return json{{"epochs", c.epochs},
                {"lambda", c.lambda},
                {"learning_rate", c.rmsprop.learning_rate},
                {"decay", c.rmsprop.decay},
                {"epsilon", c.rmsprop.epsilon},
                {"batch_policy", c.batch_policy},
                {"seed", c.seed}};
}

training::TrainConfig train_cfg_from_json(const json& j) {
    training::TrainConfig c;
    c.epochs = j.at("epochs").get<int>();
    c.lambda = j.at("lambda").get<double>();
    c.rmsprop.learning_rate = j.at("learning_rate").get<double>();
    c.rmsprop.decay = j.at("decay").get<double>();
    c.rmsprop.epsilon = j.at("epsilon").get<double>();
    c.batch_policy = j.at("batch_policy").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

json optimizer_to_json(const training::OptimizerState& o) {
    json ltn = json::object(), rwtn = json::object();
    for (const auto& [name, acc] : o.ltn_acc) ltn[name] = ltn_to_json(acc);
    for (const auto& [name, acc] : o.rwtn_acc) rwtn[name] = decoder_to_json(acc);
    return json{{"step", o.step}, {"ltn", std::move(ltn)}, {"rwtn", std::move(rwtn)}};
}

json trace_to_json(const std::vector<training::TraceRow>& trace) {
    json rows = json::array();
    for (const auto& r : trace) rows.push_back({r.epoch, r.loss, r.satisfiability});
    return rows;
}

std::vector<training::TraceRow> trace_from_json(const json& rows) {
    std::vector<training::TraceRow> out;
    for (const auto& r : rows)
        out.push_back({r[0].get<int>(), r[1].get<double>(), r[2].get<double>()});
    return out;
}

void dump_to(const json& j, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write " + file.string());
    out << j.dump() << '\n';  // compact: weight arrays dominate these files
}

json parse_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot read " + file.string());
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw DataError(file.string() + ": " + e.what());
    }
}

json model_common(const sii::SiiModel& m, const training::TrainConfig& cfg) {
    return json{{"format", "rwtn-model/1"},
                {"kind", sii::model_kind_name(m.kind)},
                {"classes", m.classes},
                {"trained", m.trained},
                {"part_of", m.part_of},
                {"table", table_to_json(m.table)},
                {"n", m.n},
                {"hyper", hyper_to_json(m.hyper)},
                {"seed", m.seed},
                {"train_config", train_cfg_to_json(cfg)}};
}

}  // namespace

std::string encoder_hash_hex(const grounders::RwtnEncoderParams& enc) {
    std::ostringstream ss;
    ss << std::hex << enc.content_hash();
    return ss.str();
}

void write_trace_csv(const std::vector<training::TraceRow>& trace, std::ostream& out) {
    out << "epoch,loss,satisfiability\n";
    for (const auto& r : trace)
        out << r.epoch << ',' << fmt_double(r.loss) << ',' << fmt_double(r.satisfiability) << '\n';
}

void save_model(const std::filesystem::path& dir, const sii::SiiModel& model,
                const training::TrainConfig& cfg, const training::TrainResult& result) {
    std::filesystem::create_directories(dir);
    json doc = model_common(model, cfg);
    json preds = json::object();
    json encoders = json::array();
    for (const std::string& name : model.trained) {
        const semantics::PredicateGrounder& g = model.grounding.predicate_map.at(name);
        if (const auto* ltn = std::get_if<semantics::LtnGrounder>(&g)) {
            preds[name] = json{{"type", "ltn"}, {"params", ltn_to_json(ltn->params)}};
        } else if (const auto* rw = std::get_if<semantics::RwtnGrounder>(&g)) {
            // One encoder copy per predicate: a plain rwtn model shares nothing.
            preds[name] = json{{"type", "rwtn"},
                               {"encoder", encoders.size()},
                               {"decoder", decoder_to_json(rw->decoder)}};
            encoders.push_back(encoder_to_json(*rw->encoder));
        } else {
            throw DataError("save_model: predicate '" + name + "' has no learnable grounder");
        }
    }
    doc["predicates"] = std::move(preds);
    doc["encoders"] = std::move(encoders);
    doc["optimizer"] = optimizer_to_json(result.optimizer);
    doc["trace"] = trace_to_json(result.trace);
    doc["final_satisfiability"] = result.final_satisfiability;
    dump_to(doc, dir / "model.json");

    std::ofstream csv(dir / "trace.csv", std::ios::binary);
    if (!csv) throw DataError("cannot write trace.csv");
    write_trace_csv(result.trace, csv);
}

void save_model_shared(const std::filesystem::path& dir, const sii::SiiModel& model,
                       const training::TrainConfig& cfg,
                       const std::vector<std::pair<std::string, training::TrainResult>>& per_class) {
    std::filesystem::create_directories(dir);
    if (model.encoders.size() != 1)
        throw DataError("save_model_shared: expected exactly one shared encoder");
    dump_to(json{{"format", "rwtn-encoder/1"}, {"encoder", encoder_to_json(*model.encoders[0])}},
            dir / "encoder.json");

    json manifest = model_common(model, cfg);
    manifest["encoder_file"] = "encoder.json";
    json decoder_files = json::object();
    for (const auto& [cls, result] : per_class) {
        const auto* rw =
            std::get_if<semantics::RwtnGrounder>(&model.grounding.predicate_map.at(cls));
        if (!rw) throw DataError("save_model_shared: class '" + cls + "' is not rwtn-grounded");
        const std::string fname = "decoder_" + cls + ".json";
        dump_to(json{{"format", "rwtn-decoder/1"},
                     {"class", cls},
                     {"decoder", decoder_to_json(rw->decoder)},
                     {"optimizer", optimizer_to_json(result.optimizer)},
                     {"trace", trace_to_json(result.trace)},
                     {"final_satisfiability", result.final_satisfiability}},
                dir / fname);
        decoder_files[cls] = fname;
        std::ofstream csv(dir / ("trace_" + cls + ".csv"), std::ios::binary);
        if (!csv) throw DataError("cannot write trace csv");
        write_trace_csv(result.trace, csv);
    }
    manifest["decoder_files"] = std::move(decoder_files);
    dump_to(manifest, dir / "model.json");
}

LoadedModel load_model(const std::filesystem::path& dir) {
    const json doc = parse_file(dir / "model.json");
    if (doc.at("format").get<std::string>() != "rwtn-model/1")
        throw DataError("unsupported model format");
    LoadedModel out;
    sii::SiiModel& m = out.model;
    m.kind = sii::model_kind_from(doc.at("kind").get<std::string>());
    m.classes = doc.at("classes").get<std::vector<std::string>>();
    m.trained = doc.at("trained").get<std::vector<std::string>>();
    m.part_of = doc.at("part_of").get<std::string>();
    m.table = table_from_json(doc.at("table"));
    m.n = doc.at("n").get<std::size_t>();
    m.hyper = hyper_from_json(doc.at("hyper"));
    m.seed = doc.at("seed").get<std::uint64_t>();
    out.cfg = train_cfg_from_json(doc.at("train_config"));

    if (m.kind == sii::ModelKind::RwtnShared) {
        const json enc_doc = parse_file(dir / doc.at("encoder_file").get<std::string>());
        auto enc = std::make_shared<grounders::RwtnEncoderParams>(
            encoder_from_json(enc_doc.at("encoder")));
        m.encoders.push_back(enc);
        for (const auto& [cls, fname] : doc.at("decoder_files").items()) {
            const json dec_doc = parse_file(dir / fname.get<std::string>());
            semantics::RwtnGrounder g;
            g.encoder = enc;
            g.decoder = decoder_from_json(dec_doc.at("decoder"));
            m.grounding.predicate_map.emplace(cls, std::move(g));
        }
        return out;
    }

    std::vector<std::shared_ptr<const grounders::RwtnEncoderParams>> encoders;
    for (const json& e : doc.at("encoders"))
        encoders.push_back(std::make_shared<grounders::RwtnEncoderParams>(encoder_from_json(e)));
    m.encoders = encoders;
    for (const auto& [name, pj] : doc.at("predicates").items()) {
        const std::string type = pj.at("type").get<std::string>();
        if (type == "ltn") {
            m.grounding.predicate_map.emplace(
                name, semantics::LtnGrounder{ltn_from_json(pj.at("params"))});
        } else if (type == "rwtn") {
            semantics::RwtnGrounder g;
            g.encoder = encoders.at(pj.at("encoder").get<std::size_t>());
            g.decoder = decoder_from_json(pj.at("decoder"));
            m.grounding.predicate_map.emplace(name, std::move(g));
        } else {
            throw DataError("model file: unknown grounder type '" + type + "'");
        }
    }
    out.trace = trace_from_json(doc.at("trace"));
    return out;
}

namespace {

std::size_t ltn_weights(const json& p) {
    std::size_t n = 0;
    for (const json& s : p.at("W").at("slices")) n += s.size();
    return n + p.at("V").at("data").size() + p.at("b").size() + p.at("u").size();
}

std::size_t encoder_weights(const json& e) {
    std::size_t n = 0;
    for (const json& s : e.at("W_res").at("slices")) n += s.size();
    return n + e.at("V_in").at("data").size();
}

std::size_t decoder_weights(const json& d) {
    return d.at("u").at("data").size() + d.at("k_out").size();
}

}  // namespace

std::size_t count_stored_weights(const std::filesystem::path& dir) {
    const json doc = parse_file(dir / "model.json");
    std::size_t n = 0;
    if (doc.at("kind").get<std::string>() == "rwtn-shared") {
        n += encoder_weights(parse_file(dir / doc.at("encoder_file").get<std::string>()).at("encoder"));
        for (const auto& [cls, fname] : doc.at("decoder_files").items())
            n += decoder_weights(parse_file(dir / fname.get<std::string>()).at("decoder"));
        return n;
    }
    for (const json& e : doc.at("encoders")) n += encoder_weights(e);
    for (const auto& [name, pj] : doc.at("predicates").items()) {
        if (pj.at("type").get<std::string>() == "ltn")
            n += ltn_weights(pj.at("params"));
        else
            n += decoder_weights(pj.at("decoder"));
    }
    return n;
}

}  // namespace rwtn::serialize
