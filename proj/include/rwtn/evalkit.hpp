#pragma once

#include <map>
#include <string>
#include <vector>

#include "rwtn/scenes.hpp"
#include "rwtn/semantics.hpp"

namespace rwtn::evalkit {

struct PrPoint {
    double threshold;
    double precision;
    double recall;
};

/// Threshold-swept precision-recall curve. Points run from the highest
/// threshold down, so recall is nondecreasing; auc integrates precision over
/// recall by the trapezoidal rule, anchored at (0, precision of the highest
/// threshold).
struct PrCurve {
    std::vector<PrPoint> points;
    double auc = 0.0;
};

/// scored: (score, label). Throws DataError when no positives are present.
PrCurve pr_curve(std::vector<std::pair<double, int>> scored);

struct T1Result {
    std::map<std::string, PrCurve> per_class;
    double macro_auc = 0.0;
    std::vector<std::string> skipped;  // classes absent from the test set
    double th = 0.7;
};

/// Per-class PR curves for type classification: grounder truth values as
/// scores, true_class as labels, over every test box.
T1Result eval_t1(const fol::Signature& sig, const semantics::Grounding& g,
                 const std::vector<scenes::Scene>& test, double th = 0.7);

/// Part-of detection: grounder truth values over all same-scene ordered pairs
/// (b != b'), labels from the ground-truth parent relation.
PrCurve eval_t2(const fol::Signature& sig, const semantics::Grounding& g,
                const std::vector<scenes::Scene>& test);

/// Geometry-only baseline: score(b, b') = inclusion ratio.
PrCurve ir_baseline(const std::vector<scenes::Scene>& test, double th = 0.7);

struct MeanCi {
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Sample mean with a 95% t-interval (width 0 for a single sample).
MeanCi mean_ci95(const std::vector<double>& xs);

/// Two-sided 97.5% Student-t quantile.
double t_quantile_975(int df);

/// AUC samples per (task, model) over repeated seeds.
struct ComparisonReport {
    struct Row {
        std::string task;   // "t1" | "t2"
        std::string model;  // "ltn", "rwtn", "rwtn-shared", "ir", "crisp"
        std::vector<double> auc;  // one per seed
        MeanCi ci;
    };
    std::vector<Row> rows;

    Row& row(const std::string& task, const std::string& model);
    void finalize();  // fills ci from auc
};

void write_curve_csv(const PrCurve& c, std::ostream& out);

}  // namespace rwtn::evalkit
