#include "rwtn/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rwtn/format.hpp"

namespace rwtn::evalkit {

PrCurve pr_curve(std::vector<std::pair<double, int>> scored) {
    long positives = 0;
    for (const auto& [s, l] : scored) positives += l ? 1 : 0;
    if (positives == 0) throw DataError("pr_curve: no positive labels");
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    PrCurve c;
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < scored.size()) {
        const double th = scored[i].first;
        while (i < scored.size() && scored[i].first == th) {
            (scored[i].second ? tp : fp) += 1;
            ++i;
        }
        c.points.push_back({th, static_cast<double>(tp) / static_cast<double>(tp + fp),
                            static_cast<double>(tp) / static_cast<double>(positives)});
    }
    double auc = 0.0;
    double prev_r = 0.0, prev_p = c.points.front().precision;
    for (const PrPoint& pt : c.points) {
        auc += (pt.recall - prev_r) * (pt.precision + prev_p) / 2.0;
        prev_r = pt.recall;
        prev_p = pt.precision;
    }
    c.auc = auc;
    return c;
}

T1Result eval_t1(const fol::Signature& sig, const semantics::Grounding& g,
                 const std::vector<scenes::Scene>& test, double th) {
    T1Result out;
    out.th = th;
    const std::vector<std::string> classes = sig.unary_predicates();
    double auc_sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        std::vector<std::pair<double, int>> scored;
        for (const scenes::Scene& s : test)
            for (const scenes::BoxRecord& b : s.boxes)
                scored.emplace_back(
                    semantics::grounder_eval(g.predicate_map.at(classes[c]), grounding_vector(b)),
                    b.true_class == static_cast<int>(c) ? 1 : 0);
        const bool any_positive =
            std::any_of(scored.begin(), scored.end(), [](const auto& p) { return p.second == 1; });
        if (!any_positive) {
            out.skipped.push_back(classes[c]);
            continue;
        }
        PrCurve curve = pr_curve(std::move(scored));
        auc_sum += curve.auc;
        ++counted;
        out.per_class.emplace(classes[c], std::move(curve));
    }
    if (counted == 0) throw DataError("eval_t1: no class has positives in the test set");
    out.macro_auc = auc_sum / static_cast<double>(counted);
    return out;
}

PrCurve eval_t2(const fol::Signature& sig, const semantics::Grounding& g,
                const std::vector<scenes::Scene>& test) {
    const std::vector<std::string> binary = sig.binary_predicates();
    if (binary.size() != 1) throw ConfigError("eval_t2: expected exactly one binary predicate");
    const semantics::PredicateGrounder& grounder = g.predicate_map.at(binary[0]);
    std::vector<std::pair<double, int>> scored;
    for (const scenes::Scene& s : test)
        for (const scenes::BoxRecord& b : s.boxes)
            for (const scenes::BoxRecord& bp : s.boxes) {
                if (b.id == bp.id) continue;
                scored.emplace_back(semantics::grounder_eval(grounder, pair_vector(b, bp)),
                                    b.parent && *b.parent == bp.id ? 1 : 0);
            }
    return pr_curve(std::move(scored));
}

PrCurve ir_baseline(const std::vector<scenes::Scene>& test, double th) {
    (void)th;  // the experiments' decision threshold; the curve sweeps all of them
    std::vector<std::pair<double, int>> scored;
    for (const scenes::Scene& s : test)
        for (const scenes::BoxRecord& b : s.boxes)
            for (const scenes::BoxRecord& bp : s.boxes) {
                if (b.id == bp.id) continue;
                scored.emplace_back(inclusion_ratio(b.box, bp.box),
                                    b.parent && *b.parent == bp.id ? 1 : 0);
            }
    return pr_curve(std::move(scored));
}

double t_quantile_975(int df) {
    static const double table[] = {
        12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912, 2.364624, 2.306004,
        2.262157,  2.228139, 2.200985, 2.178813, 2.160369, 2.144787, 2.131450, 2.119905,
        2.109816,  2.100922, 2.093024, 2.085963, 2.079614, 2.073873, 2.068658, 2.063899,
        2.059539,  2.055529, 2.051831, 2.048407, 2.045230, 2.042272};
    if (df < 1) throw ConfigError("t_quantile_975: df must be >= 1");
    if (df <= 30) return table[df - 1];
    return 1.959964;
}

MeanCi mean_ci95(const std::vector<double>& xs) {
    MeanCi out;
    if (xs.empty()) throw DataError("mean_ci95: empty sample");
    double sum = 0.0;
    for (double x : xs) sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    if (xs.size() == 1) {
        out.lo = out.hi = out.mean;
        return out;
    }
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    const double se = std::sqrt(ss / static_cast<double>(xs.size() - 1)) /
                      std::sqrt(static_cast<double>(xs.size()));
    const double half = t_quantile_975(static_cast<int>(xs.size()) - 1) * se;
    out.lo = out.mean - half;
    out.hi = out.mean + half;
    return out;
}

ComparisonReport::Row& ComparisonReport::row(const std::string& task, const std::string& model) {
    for (Row& r : rows)
        if (r.task == task && r.model == model) return r;
    rows.push_back({task, model, {}, {}});
    return rows.back();
}

void ComparisonReport::finalize() {
    for (Row& r : rows) r.ci = mean_ci95(r.auc);
}

void write_curve_csv(const PrCurve& c, std::ostream& out) {
    out << "threshold,precision,recall\n";
    for (const PrPoint& p : c.points)
        out << fmt_double(p.threshold) << ',' << fmt_double(p.precision) << ','
            << fmt_double(p.recall) << '\n';
}

}  // namespace rwtn::evalkit
