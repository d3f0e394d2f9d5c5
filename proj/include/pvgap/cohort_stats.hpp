#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pvgap/parcellation.hpp"
#include "pvgap/sweep.hpp"

namespace pvgap {

struct CohortError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One case's result for one area. Failed areas are kept with ok = false
/// and are left out of every statistic.
struct CohortEntry {
    std::string case_id;
    std::string area;
    Strategy strategy = Strategy::independent;
    std::vector<int> labels;
    bool ok = true;
    double rgm_nauc = 1.0;
    double gap_count_mean = 0.0;
    double gl_mm_mean = 0.0;
    std::vector<GapRecord> reference_gaps;  // at the report's reference threshold
};

/// Entries sorted by case id, then by the area's order in its report, so
/// the table does not depend on the order the reports were given in.
struct CohortTable {
    std::vector<std::string> case_ids;
    std::vector<std::string> areas;  // first appearance in case-id order
    std::vector<CohortEntry> entries;
};

/// Throws CohortError on an empty list or a duplicate case id.
CohortTable build_table(const std::vector<ThresholdSweep>& reports);

enum class Metric { rgm_nauc, gap_count, gl_mm };
const char* to_string(Metric m);
double metric_value(const CohortEntry& e, Metric m);

/// Mean and sample SD (n - 1; 0 when n = 1) over the cases where the
/// area succeeded.
struct AreaStats {
    std::string area;
    Strategy strategy = Strategy::independent;
    int n = 0;
    double rgm_nauc_mean = 0.0, rgm_nauc_sd = 0.0;
    double gap_count_mean = 0.0, gap_count_sd = 0.0;
    double gl_mm_mean = 0.0, gl_mm_sd = 0.0;
};
std::vector<AreaStats> aggregate(const CohortTable& table);

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;  // two-sided
};

/// Welch's unequal-variance t-test. Throws CohortError when a sample has
/// fewer than two values or both samples have zero variance.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value of Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct OneVsRestResult {
    std::string area;
    Metric metric = Metric::rgm_nauc;
    int n_area = 0;
    int n_rest = 0;
    WelchResult test;
};

/// The area's values against the pooled values of every other
/// independent-strategy area. Throws CohortError when the area is unknown
/// or the test is degenerate.
OneVsRestResult one_vs_rest(const CohortTable& table, Metric metric, const std::string& area);

/// Bins of width `bin_width` over [0, 1]: left-closed, right-open, last bin
/// closed. Throws CohortError on a value outside [0, 1].
std::vector<int> histogram(std::span<const double> values, double bin_width = 0.1);

/// Per-region gap occurrence at the reference threshold. A region is
/// present when some area of the strategy covers it.
struct RegionStats {
    int region = 0;
    bool present = false;
    int patients_with_gap = 0;
    double percent_patients = 0.0;
    int total_gaps = 0;
    double mean_gap_length_mm = 0.0;
};
std::vector<RegionStats> regional_map(const CohortTable& table, Strategy strategy);

/// Writes cohort.csv, area_stats.csv, tests.csv, histograms.csv,
/// regional_independent.csv and regional_joint.csv into `dir`.
void write_cohort_csvs(const CohortTable& table, const std::filesystem::path& dir);

} // namespace pvgap
