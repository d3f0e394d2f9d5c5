#include "pvgap/cohort_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "pvgap/io_util.hpp"

namespace pvgap {

namespace {

constexpr int kCsvDigits = 10;

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

Moments sample_moments(const std::vector<double>& x) {
    Moments m;
    if (x.empty()) return m;
    for (double v : x) m.mean += v;
    m.mean /= static_cast<double>(x.size());
    if (x.size() < 2) return m;
    double ss = 0.0;
    for (double v : x) ss += (v - m.mean) * (v - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
    return m;
}

double sample_variance(std::span<const double> x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(x.size() - 1);
}

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_fraction(double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-16;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw CohortError("incomplete beta did not converge");
}

std::string csv_num(double v) { return format_g(v, kCsvDigits); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

CohortTable build_table(const std::vector<ThresholdSweep>& reports) {
    if (reports.empty()) throw CohortError("no reports");
    std::vector<const ThresholdSweep*> sorted;
    for (const auto& r : reports) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return a->case_id < b->case_id; });
    CohortTable t;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const auto& r = *sorted[i];
        if (i > 0 && r.case_id == sorted[i - 1]->case_id) throw CohortError("duplicate case id '" + r.case_id + "'");
        t.case_ids.push_back(r.case_id);
        const auto ref = std::find(r.thresholds.begin(), r.thresholds.end(), r.reference_threshold) - r.thresholds.begin();
        for (const auto& a : r.areas) {
            if (std::find(t.areas.begin(), t.areas.end(), a.name) == t.areas.end()) t.areas.push_back(a.name);
            CohortEntry e;
            e.case_id = r.case_id;
            e.area = a.name;
            e.strategy = a.strategy;
            e.labels = a.labels;
            e.ok = a.ok();
            if (e.ok) {
                e.rgm_nauc = a.rgm_nauc;
                e.gap_count_mean = a.gap_count_mean;
                e.gl_mm_mean = a.gl_mm_mean;
                if (static_cast<std::size_t>(ref) < a.per_threshold.size()) e.reference_gaps = a.per_threshold[ref].gaps;
            }
            t.entries.push_back(std::move(e));
        }
    }
    return t;
}

const char* to_string(Metric m) {
    switch (m) {
    case Metric::rgm_nauc: return "rgm_nauc";
    case Metric::gap_count: return "gap_count";
    case Metric::gl_mm: return "gl_mm";
    }
    return "?";
}

double metric_value(const CohortEntry& e, Metric m) {
    switch (m) {
    case Metric::rgm_nauc: return e.rgm_nauc;
    case Metric::gap_count: return e.gap_count_mean;
    case Metric::gl_mm: return e.gl_mm_mean;
    }
    return 0.0;
}

std::vector<AreaStats> aggregate(const CohortTable& table) {
    std::vector<AreaStats> out;
    for (const auto& area : table.areas) {
        AreaStats s;
        s.area = area;
        std::vector<double> nauc, count, gl;
        for (const auto& e : table.entries) {
            if (e.area != area) continue;
            s.strategy = e.strategy;
            if (!e.ok) continue;
            nauc.push_back(e.rgm_nauc);
            count.push_back(e.gap_count_mean);
            gl.push_back(e.gl_mm_mean);
        }
        s.n = static_cast<int>(nauc.size());
        const auto a = sample_moments(nauc), b = sample_moments(count), c = sample_moments(gl);
        s.rgm_nauc_mean = a.mean;
        s.rgm_nauc_sd = a.sd;
        s.gap_count_mean = b.mean;
        s.gap_count_sd = b.sd;
        s.gl_mm_mean = c.mean;
        s.gl_mm_sd = c.sd;
        out.push_back(s);
    }
    return out;
}

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) throw CohortError("incomplete beta: bad arguments");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
    return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw CohortError("t distribution needs positive degrees of freedom");
    if (std::isinf(t)) return 0.0;
    return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw CohortError("t-test needs at least two values per sample");
    const double va = sample_variance(a) / static_cast<double>(a.size());
    const double vb = sample_variance(b) / static_cast<double>(b.size());
    const double se2 = va + vb;
    if (!(se2 > 0.0)) throw CohortError("t-test: both samples have zero variance");
    WelchResult r;
    r.t = (mean_of(a) - mean_of(b)) / std::sqrt(se2);
    r.df = se2 * se2 / (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
    r.p = student_t_two_sided_p(r.t, r.df);
    return r;
}

OneVsRestResult one_vs_rest(const CohortTable& table, Metric metric, const std::string& area) {
    if (std::find(table.areas.begin(), table.areas.end(), area) == table.areas.end())
        throw CohortError("unknown area '" + area + "'");
    std::vector<double> mine, rest;
    std::set<std::string> others;
    for (const auto& e : table.entries) {
        if (!e.ok) continue;
        if (e.area == area) {
            mine.push_back(metric_value(e, metric));
        } else if (e.strategy == Strategy::independent) {
            rest.push_back(metric_value(e, metric));
            others.insert(e.area);
        }
    }
    if (others.empty()) throw CohortError("one-vs-rest for " + area + ": no other independent area");
    OneVsRestResult r;
    r.area = area;
    r.metric = metric;
    r.n_area = static_cast<int>(mine.size());
    r.n_rest = static_cast<int>(rest.size());
    try {
        r.test = welch_t_test(mine, rest);
    } catch (const CohortError& e) {
        throw CohortError("one-vs-rest for " + area + ": " + e.what());
    }
    return r;
}

std::vector<int> histogram(std::span<const double> values, double bin_width) {
    if (!(bin_width > 0.0) || bin_width > 1.0) throw CohortError("histogram: bin width must lie in (0, 1]");
    const int bins = static_cast<int>(std::lround(1.0 / bin_width));
    if (std::abs(bins * bin_width - 1.0) > 1e-9) throw CohortError("histogram: bin width must divide 1");
    const auto edge = [bins](int k) { return static_cast<double>(k) / bins; };
    std::vector<int> counts(bins, 0);
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0)) throw CohortError("histogram: value " + format_g(v, 6) + " outside [0, 1]");
        int k = static_cast<int>(std::floor(v * bins));
        // Edges are k / bins so decimal edges like 0.3 land in the upper bin.
        if (k > 0 && v < edge(k)) --k;
        if (k + 1 < bins && v >= edge(k + 1)) ++k;
        ++counts[std::min(k, bins - 1)];
    }
    return counts;
}

std::vector<RegionStats> regional_map(const CohortTable& table, Strategy strategy) {
    std::vector<RegionStats> out(kRegionLabelCount);
    std::vector<std::set<std::string>> covered_by(kRegionLabelCount), flagged(kRegionLabelCount);
    std::vector<double> total_length(kRegionLabelCount, 0.0);
    for (int r = 0; r < kRegionLabelCount; ++r) out[r].region = r;
    for (const auto& e : table.entries) {
        if (!e.ok || e.strategy != strategy) continue;
        for (int l : e.labels)
            if (l >= 0 && l < kRegionLabelCount) covered_by[l].insert(e.case_id);
        for (const auto& g : e.reference_gaps) {
            const int r = g.midpoint_region;
            if (r < 0 || r >= kRegionLabelCount) continue;
            ++out[r].total_gaps;
            total_length[r] += g.length_mm;
            flagged[r].insert(e.case_id);
        }
    }
    for (int r = 0; r < kRegionLabelCount; ++r) {
        auto& s = out[r];
        s.present = !covered_by[r].empty();
        if (!s.present) continue;
        s.patients_with_gap = static_cast<int>(flagged[r].size());
        s.percent_patients = 100.0 * s.patients_with_gap / static_cast<double>(covered_by[r].size());
        if (s.total_gaps > 0) s.mean_gap_length_mm = total_length[r] / s.total_gaps;
    }
    return out;
}

void write_cohort_csvs(const CohortTable& table, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    std::string cohort = "case_id,area,strategy,status,rgm_nauc,gap_count_mean,gl_mm_mean,reference_gap_count\n";
    for (const auto& e : table.entries) {
        cohort += csv_field(e.case_id) + "," + csv_field(e.area) + "," + to_string(e.strategy) + ",";
        if (e.ok) {
            cohort += "ok," + csv_num(e.rgm_nauc) + "," + csv_num(e.gap_count_mean) + "," + csv_num(e.gl_mm_mean) + "," +
                      std::to_string(e.reference_gaps.size()) + "\n";
        } else {
            cohort += "failed,,,,\n";
        }
    }
    write_file_atomic(dir / "cohort.csv", cohort);

    std::string stats = "area,strategy,n,rgm_nauc_mean,rgm_nauc_sd,gap_count_mean,gap_count_sd,gl_mm_mean,gl_mm_sd\n";
    for (const auto& s : aggregate(table)) {
        stats += csv_field(s.area) + "," + to_string(s.strategy) + "," + std::to_string(s.n) + "," + csv_num(s.rgm_nauc_mean) +
                 "," + csv_num(s.rgm_nauc_sd) + "," + csv_num(s.gap_count_mean) + "," + csv_num(s.gap_count_sd) + "," +
                 csv_num(s.gl_mm_mean) + "," + csv_num(s.gl_mm_sd) + "\n";
    }
    write_file_atomic(dir / "area_stats.csv", stats);

    std::string tests = "area,metric,n_area,n_rest,t,df,p,note\n";
    for (const auto& area : table.areas) {
        const auto it = std::find_if(table.entries.begin(), table.entries.end(), [&](const auto& e) { return e.area == area; });
        if (it->strategy != Strategy::independent) continue;
        for (Metric m : {Metric::rgm_nauc, Metric::gap_count, Metric::gl_mm}) {
            tests += csv_field(area) + "," + to_string(m) + ",";
            try {
                const auto r = one_vs_rest(table, m, area);
                tests += std::to_string(r.n_area) + "," + std::to_string(r.n_rest) + "," + csv_num(r.test.t) + "," +
                         csv_num(r.test.df) + "," + csv_num(r.test.p) + ",\n";
            } catch (const CohortError& e) {
                tests += ",,,,," + csv_field(e.what()) + "\n";
            }
        }
    }
    write_file_atomic(dir / "tests.csv", tests);

    std::string hist = "area,bin_lo,bin_hi,count\n";
    for (const auto& area : table.areas) {
        std::vector<double> values;
        for (const auto& e : table.entries)
            if (e.ok && e.area == area) values.push_back(e.rgm_nauc);
        const auto counts = histogram(values);
        for (std::size_t k = 0; k < counts.size(); ++k)
            hist += csv_field(area) + "," + csv_num(k / 10.0) + "," + csv_num((k + 1) / 10.0) + "," + std::to_string(counts[k]) + "\n";
    }
    write_file_atomic(dir / "histograms.csv", hist);

    for (Strategy s : {Strategy::independent, Strategy::joint}) {
        std::string csv = "region,present,patients_with_gap,percent_patients,total_gaps,mean_gap_length_mm\n";
        for (const auto& r : regional_map(table, s)) {
            csv += std::to_string(r.region) + ",";
            if (!r.present) {
                csv += "0,,,,\n";
                continue;
            }
            csv += "1," + std::to_string(r.patients_with_gap) + "," + csv_num(r.percent_patients) + "," +
                   std::to_string(r.total_gaps) + "," + csv_num(r.mean_gap_length_mm) + "\n";
        }
        write_file_atomic(dir / (std::string("regional_") + to_string(s) + ".csv"), csv);
    }
}

} // namespace pvgap
