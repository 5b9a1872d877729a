// Command-line front end: dataset generation, training, evaluation,
// model comparison, and parameter accounting.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric divergence.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rwtn/evalkit.hpp"
#include "rwtn/format.hpp"
#include "rwtn/scenes.hpp"
#include "rwtn/serialize.hpp"
#include "rwtn/sii.hpp"
#include "rwtn/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rwtn;

namespace {

struct HyperFlags {
    sii::ModelHyper hyper;
    training::TrainConfig train;
    int unary_negatives = 3;
    std::string train_mode = "rmsprop";

    void add_to(CLI::App* cmd) {
        cmd->add_option("--rho", hyper.reservoir.rho, "Target spectral radius per encoder slice")
            ->capture_default_str();
        cmd->add_option("--beta", hyper.reservoir.beta, "Nonzero-connection fraction")
            ->capture_default_str();
        cmd->add_option("--R", hyper.reservoir.R, "Encoder slices / reservoir units")
            ->capture_default_str();
        cmd->add_option("--omega", hyper.reservoir.omega, "Input weight scaling half-range")
            ->capture_default_str();
        cmd->add_option("--xi", hyper.reservoir.xi, "Train-time noise standard deviation")
            ->capture_default_str();
        cmd->add_option("--t", hyper.t, "Decoder hidden units")->capture_default_str();
        cmd->add_option("--k", hyper.k, "LTN tensor slices")->capture_default_str();
        cmd->add_option("--init-stddev", hyper.init_stddev, "Learnable init stddev")
            ->capture_default_str();
        cmd->add_option("--th", hyper.th, "Decision threshold for reports")->capture_default_str();
        cmd->add_option("--epochs", train.epochs, "Training epochs")->capture_default_str();
        cmd->add_option("--lambda", train.lambda, "L2 regularization coefficient")
            ->capture_default_str();
        cmd->add_option("--lr", train.rmsprop.learning_rate, "RMSProp learning rate")
            ->capture_default_str();
        cmd->add_option("--decay", train.rmsprop.decay, "RMSProp decay")->capture_default_str();
        cmd->add_option("--eps", train.rmsprop.epsilon, "RMSProp epsilon")->capture_default_str();
        cmd->add_option("--batch-policy", train.batch_policy, "Batch policy (full)")
            ->capture_default_str();
        cmd->add_option("--unary-negatives", unary_negatives,
                        "Wrong-class literals per box (0 = all)")
            ->capture_default_str();
        cmd->add_option("--train-mode", train_mode, "rmsprop | ridge (rwtn decoders only)")
            ->capture_default_str()
            ->check(CLI::IsMember({"rmsprop", "ridge"}));
    }
};

void print_config(const CLI::App* cmd) {
    std::cout << "# " << cmd->get_name()
              << " configuration (precedence: flags > config file > defaults)\n";
    for (const CLI::Option* o : cmd->get_options()) {
        if (o->get_name() == "--help" || o->get_name().empty()) continue;
        std::string value = o->count() ? o->results()[0] : o->get_default_str();
        if (value.empty()) value = "(unset)";
        std::cout << "#   " << o->get_name() << " = " << value << '\n';
    }
}

std::string run_stamp(const std::string& model, std::uint64_t seed) {
    return model + "-s" + std::to_string(seed);
}

// ---------------------------------------------------------------------------

int cmd_gen_data(const std::string& out_dir, scenes::DatasetSpec spec) {
    scenes::Dataset ds = scenes::generate(spec);
    scenes::save_dataset(ds, out_dir);

    // Constraint clauses for audit, in the loadable theory format.
    fol::Signature sig;
    for (const std::string& c : ds.classes) sig.add_predicate(c, 1);
    sig.add_predicate("partOf", 2);
    const std::vector<fol::Formula> axioms = semantics::mereology_constraints(ds.table, sig);
    std::ofstream cf(fs::path(out_dir) / "constraints.txt", std::ios::binary);
    if (!cf) throw DataError("cannot write constraints.txt");
    fol::write_theory(sig, axioms, cf);

    std::size_t train_boxes = 0, test_boxes = 0, pairs = 0;
    for (const auto& s : ds.train) train_boxes += s.boxes.size(), pairs += s.part_of.size();
    for (const auto& s : ds.test) test_boxes += s.boxes.size(), pairs += s.part_of.size();
    std::cout << "dataset written to " << out_dir << '\n'
              << "  scenes: " << ds.train.size() << " train + " << ds.test.size() << " test\n"
              << "  boxes:  " << train_boxes << " train + " << test_boxes << " test\n"
              << "  part-of pairs: " << pairs << '\n'
              << "  constraint clauses: " << axioms.size() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

struct TrainOutcome {
    sii::SiiModel model;
    fs::path dir;
};

TrainOutcome run_training(const scenes::Dataset& ds, const std::string& model_name,
                          const std::vector<std::string>& class_subset, const HyperFlags& hf,
                          std::uint64_t seed, const fs::path& out_root, bool quiet = false) {
    const sii::ModelKind kind = sii::model_kind_from(model_name);
    training::TrainConfig cfg = hf.train;
    cfg.seed = seed;
    cfg.validate();

    sii::SiiModel model = sii::build_model(kind, ds, hf.hyper, seed, class_subset);
    for (const auto& enc : model.encoders)
        if (!quiet)
            std::cout << "encoder mn=" << enc->mn() << " hash=" << serialize::encoder_hash_hex(*enc)
                      << '\n';

    const fs::path dir = out_root / "models" / run_stamp(model_name, seed);
    if (kind == sii::ModelKind::RwtnShared) {
        std::vector<semantics::GroundedTheory> theories;
        theories.reserve(model.trained.size());
        for (const std::string& cls : model.trained)
            theories.push_back(sii::build_class_theory(model, ds.train, cls, hf.unary_negatives));
        std::vector<std::pair<std::string, training::TrainResult>> results;
        if (hf.train_mode == "ridge") {
            for (std::size_t i = 0; i < theories.size(); ++i) {
                training::ridge_fit_decoders(theories[i], cfg.lambda);
                semantics::CompiledTheory ct(theories[i]);
                training::TrainResult r;
                r.final_satisfiability = ct.forward(semantics::EvalMode::Eval);
                r.trace.push_back({0, 1.0 - r.final_satisfiability, r.final_satisfiability});
                results.emplace_back(model.trained[i], std::move(r));
            }
        } else {
            std::vector<semantics::GroundedTheory*> ptrs;
            for (auto& t : theories) ptrs.push_back(&t);
            std::vector<training::TrainResult> rs =
                training::train_shared(ptrs, *model.encoders.at(0), cfg);
            for (std::size_t i = 0; i < rs.size(); ++i)
                results.emplace_back(model.trained[i], std::move(rs[i]));
        }
        for (const auto& t : theories) sii::absorb_trained(model, t);
        serialize::save_model_shared(dir, model, cfg, results);
        if (!quiet) {
            double worst = 1.0;
            for (const auto& [cls, r] : results) worst = std::min(worst, r.final_satisfiability);
            std::cout << "trained " << results.size() << " decoders; min final satisfiability "
                      << fmt_double(worst) << '\n';
        }
    } else {
        sii::TheoryOptions opt;
        opt.unary_negatives = hf.unary_negatives;
        semantics::GroundedTheory theory = sii::build_theory(model, ds.train, opt);
        training::TrainResult result;
        if (hf.train_mode == "ridge") {
            if (kind != sii::ModelKind::Rwtn)
                throw ConfigError("--train-mode ridge applies to rwtn decoders only");
            training::ridge_fit_decoders(theory, cfg.lambda);
            semantics::CompiledTheory ct(theory);
            result.final_satisfiability = ct.forward(semantics::EvalMode::Eval);
            result.trace.push_back(
                {0, 1.0 - result.final_satisfiability, result.final_satisfiability});
        } else {
            result = training::train(theory, cfg);
        }
        sii::absorb_trained(model, theory);
        serialize::save_model(dir, model, cfg, result);
        if (!quiet)
            std::cout << "final satisfiability " << fmt_double(result.final_satisfiability) << '\n';
    }
    if (!quiet) std::cout << "checkpoint written to " << dir.string() << '\n';
    return {std::move(model), dir};
}

// ---------------------------------------------------------------------------

struct EvalOutcome {
    double t1_macro = -1.0;
    std::map<std::string, double> t1_per_class;
    double t2 = -1.0;
};

EvalOutcome run_eval(const sii::SiiModel& model, const scenes::Dataset& ds, double th,
                     const fs::path& report_dir, bool write_files) {
    EvalOutcome out;
    fol::Signature sig;
    for (const std::string& c : model.trained)
        if (c != model.part_of) sig.add_predicate(c, 1);
    if (!model.part_of.empty()) sig.add_predicate(model.part_of, 2);

    if (write_files) fs::create_directories(report_dir);
    json report{{"model", sii::model_kind_name(model.kind)}, {"seed", model.seed}, {"th", th}};

    evalkit::T1Result t1 = evalkit::eval_t1(sig, model.grounding, ds.test, th);
    out.t1_macro = t1.macro_auc;
    json per_class = json::object();
    for (const auto& [cls, curve] : t1.per_class) {
        per_class[cls] = curve.auc;
        out.t1_per_class[cls] = curve.auc;
        if (write_files) {
            std::ofstream f(report_dir / ("t1_" + cls + ".csv"), std::ios::binary);
            evalkit::write_curve_csv(curve, f);
        }
    }
    report["t1"] = {{"macro_auc", t1.macro_auc},
                    {"per_class", std::move(per_class)},
                    {"skipped", t1.skipped}};

    if (!model.part_of.empty()) {
        evalkit::PrCurve t2 = evalkit::eval_t2(sig, model.grounding, ds.test);
        out.t2 = t2.auc;
        report["t2"] = {{"auc", t2.auc}};
        if (write_files) {
            std::ofstream f(report_dir / "t2.csv", std::ios::binary);
            evalkit::write_curve_csv(t2, f);
        }
    }

    // Fixed baselines: crisp type grounding on the raw scores, inclusion
    // ratio for part-of.
    fol::Signature full_sig;
    for (const std::string& c : ds.classes) full_sig.add_predicate(c, 1);
    full_sig.add_predicate("partOf", 2);
    const semantics::Grounding crisp = sii::crisp_grounding(ds, th);
    evalkit::T1Result crisp_t1 = evalkit::eval_t1(full_sig, crisp, ds.test, th);
    evalkit::PrCurve ir = evalkit::ir_baseline(ds.test, th);
    report["baselines"] = {{"crisp_t1_macro_auc", crisp_t1.macro_auc}, {"ir_t2_auc", ir.auc}};
    if (write_files) {
        std::ofstream f(report_dir / "ir.csv", std::ios::binary);
        evalkit::write_curve_csv(ir, f);
        std::ofstream r(report_dir / "report.json", std::ios::binary);
        if (!r) throw DataError("cannot write report.json");
        r << report.dump(1) << '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------

int cmd_compare(const scenes::Dataset& ds, const std::vector<std::string>& models, int seeds,
                std::uint64_t base_seed, const HyperFlags& hf, const fs::path& out_root) {
    evalkit::ComparisonReport report;
    for (const std::string& name : models) {
        for (int s = 0; s < seeds; ++s) {
            const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(s);
            std::cout << "== " << name << " seed " << seed << '\n';
            TrainOutcome tr = run_training(ds, name, {}, hf, seed, out_root, true);
            EvalOutcome ev = run_eval(tr.model, ds, hf.hyper.th,
                                      out_root / "reports" / run_stamp(name, seed), true);
            report.row("t1", name).auc.push_back(ev.t1_macro);
            if (ev.t2 >= 0.0) report.row("t2", name).auc.push_back(ev.t2);
            std::cout << "   t1 " << fmt_double(ev.t1_macro);
            if (ev.t2 >= 0.0) std::cout << "  t2 " << fmt_double(ev.t2);
            std::cout << '\n';
        }
    }
    // Deterministic baselines, one sample each.
    {
        fol::Signature sig;
        for (const std::string& c : ds.classes) sig.add_predicate(c, 1);
        sig.add_predicate("partOf", 2);
        const semantics::Grounding crisp = sii::crisp_grounding(ds, hf.hyper.th);
        report.row("t1", "crisp").auc.push_back(
            evalkit::eval_t1(sig, crisp, ds.test, hf.hyper.th).macro_auc);
        report.row("t2", "ir").auc.push_back(evalkit::ir_baseline(ds.test, hf.hyper.th).auc);
    }
    report.finalize();

    json rows = json::array();
    std::cout << "task  model         mean    95% ci\n";
    for (const auto& r : report.rows) {
        rows.push_back({{"task", r.task},
                        {"model", r.model},
                        {"auc", r.auc},
                        {"mean", r.ci.mean},
                        {"ci_lo", r.ci.lo},
                        {"ci_hi", r.ci.hi}});
        std::cout << r.task << "    " << r.model << std::string(14 - std::min<std::size_t>(13, r.model.size()), ' ')
                  << fmt_double(r.ci.mean) << "  [" << fmt_double(r.ci.lo) << ", "
                  << fmt_double(r.ci.hi) << "]\n";
    }
    fs::create_directories(out_root / "reports");
    std::ofstream f(out_root / "reports" / "comparison.json", std::ios::binary);
    if (!f) throw DataError("cannot write comparison.json");
    f << json{{"seeds", seeds}, {"base_seed", base_seed}, {"rows", std::move(rows)}}.dump(1)
      << '\n';
    std::cout << "comparison written to " << (out_root / "reports" / "comparison.json").string()
              << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_param_count(const std::string& model, std::size_t n, std::size_t m, std::size_t k,
                    std::size_t R, std::size_t t, std::size_t i) {
    if (model == "ltn") {
        std::cout << grounders::ltn_param_count(n, m, k) << '\n';
    } else if (model == "rwtn") {
        std::cout << grounders::rwtn_param_count(R, t) << '\n';
    } else if (model == "rwtn-shared") {
        const grounders::SharedSpace s = grounders::shared_space(n, m, R, t, i);
        std::cout << "classifiers:      " << i << '\n'
                  << "learnable per classifier: " << grounders::rwtn_param_count(R, t) << '\n'
                  << "stored unshared:  " << s.unshared << '\n'
                  << "stored shared:    " << s.shared << '\n';
    } else {
        throw ConfigError("param-count: unknown model '" + model + "'");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fuzzy first-order logic over tensor-network predicate grounders"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read defaults from a key=value config file");

    // gen-data --------------------------------------------------------------
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic scene dataset");
    std::string gen_out;
    scenes::DatasetSpec spec;
    gen->add_option("--out", gen_out, "Output dataset directory")->required();
    gen->add_option("--scenes", spec.scenes, "Number of scenes")->capture_default_str();
    gen->add_option("--wholes", spec.n_whole, "Whole-object classes")->capture_default_str();
    gen->add_option("--parts", spec.n_part, "Part classes")->capture_default_str();
    gen->add_option("--wholes-per-scene", spec.wholes_per_scene, "Whole boxes per scene")
        ->capture_default_str();
    gen->add_option("--parts-per-scene", spec.parts_per_scene, "Part boxes per scene")
        ->capture_default_str();
    gen->add_option("--score-noise", spec.score_noise, "Score noise stddev")->capture_default_str();
    gen->add_option("--jitter", spec.geometry_jitter, "Part placement jitter")
        ->capture_default_str();
    gen->add_option("--train-fraction", spec.train_fraction, "Train split fraction")
        ->capture_default_str();
    gen->add_option("--seed", spec.seed, "Dataset seed")->capture_default_str();

    // train -----------------------------------------------------------------
    auto* train = app.add_subcommand("train", "Train a model on a dataset");
    std::string train_data, train_out, train_model = "rwtn", train_classes = "all";
    std::uint64_t train_seed = 0;
    HyperFlags train_hf;
    train->add_option("--data", train_data, "Dataset directory")->required();
    train->add_option("--out", train_out, "Output root (models/ go under it)")->required();
    train->add_option("--model", train_model, "ltn | rwtn | rwtn-shared")->capture_default_str();
    train->add_option("--seed", train_seed, "Run seed")->capture_default_str();
    train->add_option("--classes", train_classes,
                      "rwtn-shared: 'all' or comma-separated class list")
        ->capture_default_str();
    train_hf.add_to(train);

    // eval ------------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset's test split");
    std::string eval_model, eval_data, eval_out;
    double eval_th = 0.7;
    eval->add_option("--model", eval_model, "Model directory (contains model.json)")->required();
    eval->add_option("--data", eval_data, "Dataset directory")->required();
    eval->add_option("--out", eval_out, "Output root (reports/ go under it)")->required();
    eval->add_option("--th", eval_th, "Decision threshold")->capture_default_str();

    // compare ---------------------------------------------------------------
    auto* compare = app.add_subcommand("compare", "Train and evaluate models over several seeds");
    std::string cmp_data, cmp_out, cmp_models = "ltn,rwtn";
    int cmp_seeds = 5;
    std::uint64_t cmp_base_seed = 1;
    HyperFlags cmp_hf;
    compare->add_option("--data", cmp_data, "Dataset directory")->required();
    compare->add_option("--out", cmp_out, "Output root")->required();
    compare->add_option("--models", cmp_models, "Comma-separated model list")
        ->capture_default_str();
    compare->add_option("--seeds", cmp_seeds, "Number of seeds")->capture_default_str();
    compare->add_option("--base-seed", cmp_base_seed, "First seed")->capture_default_str();
    cmp_hf.add_to(compare);

    // param-count -----------------------------------------------------------
    auto* pc = app.add_subcommand("param-count", "Learnable / stored parameter accounting");
    std::string pc_model = "ltn";
    std::size_t pc_n = 64, pc_m = 1, pc_k = 6, pc_R = 200, pc_t = 20, pc_i = 11;
    pc->add_option("--model", pc_model, "ltn | rwtn | rwtn-shared")->capture_default_str();
    pc->add_option("--n", pc_n, "Feature dimension")->capture_default_str();
    pc->add_option("--m", pc_m, "Predicate arity")->capture_default_str();
    pc->add_option("--k", pc_k, "LTN tensor slices")->capture_default_str();
    pc->add_option("--R", pc_R, "Encoder slices")->capture_default_str();
    pc->add_option("--t", pc_t, "Decoder hidden units")->capture_default_str();
    pc->add_option("--i", pc_i, "Number of classifiers")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) {
            print_config(gen);
            return cmd_gen_data(gen_out, spec);
        }
        if (train->parsed()) {
            print_config(train);
            const scenes::Dataset ds = scenes::load_dataset(train_data);
            std::vector<std::string> subset;
            if (train_model == "rwtn-shared" && train_classes != "all") {
                std::stringstream ss(train_classes);
                std::string item;
                while (std::getline(ss, item, ',')) subset.push_back(item);
            }
            run_training(ds, train_model, subset, train_hf, train_seed, train_out);
            return 0;
        }
        if (eval->parsed()) {
            print_config(eval);
            const scenes::Dataset ds = scenes::load_dataset(eval_data);
            const serialize::LoadedModel lm = serialize::load_model(eval_model);
            const fs::path dir = fs::path(eval_out) / "reports" /
                                 run_stamp(sii::model_kind_name(lm.model.kind), lm.model.seed);
            const EvalOutcome ev = run_eval(lm.model, ds, eval_th, dir, true);
            std::cout << "t1 macro auc " << fmt_double(ev.t1_macro) << '\n';
            if (ev.t2 >= 0.0) std::cout << "t2 auc " << fmt_double(ev.t2) << '\n';
            std::cout << "report written to " << dir.string() << '\n';
            return 0;
        }
        if (compare->parsed()) {
            print_config(compare);
            const scenes::Dataset ds = scenes::load_dataset(cmp_data);
            std::vector<std::string> models;
            std::stringstream ss(cmp_models);
            std::string item;
            while (std::getline(ss, item, ',')) models.push_back(item);
            if (models.empty() || cmp_seeds < 1)
                throw ConfigError("compare: need at least one model and one seed");
            return cmd_compare(ds, models, cmp_seeds, cmp_base_seed, cmp_hf, cmp_out);
        }
        if (pc->parsed()) return cmd_param_count(pc_model, pc_n, pc_m, pc_k, pc_R, pc_t, pc_i);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
