#pragma once

#include <functional>
#include <string>
#include <vector>

namespace fragscale {

struct SievePoint {
    double size_mm = 0.0;
    double percent_passing = 0.0;
};

using SieveSeries = std::vector<SievePoint>;

// Three-parameter cumulative passing curve on (0, x_max].
struct SwebrecFit {
    double x_max = 0.0;
    double x_50 = 0.0;
    double b = 0.0;

    SwebrecFit() = default;
    SwebrecFit(double x_max, double x_50, double b);
};

double swebrec_percent_passing(const SwebrecFit& fit, double size_mm);

struct SwebrecFitResult {
    SwebrecFit fit;
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0;
};

SwebrecFitResult fit_swebrec(const SieveSeries& data);

struct ResidualPoint {
    double size_mm = 0.0;
    double residual_percent = 0.0;
};

std::vector<ResidualPoint> percent_error_residuals(const SieveSeries& measured,
                                                   const SwebrecFit& reference);

// RMS gap between two passing curves over n log-spaced sizes in [lo, hi].
double curve_l2_error(const SwebrecFit& a, const SwebrecFit& b, double lo, double hi, int n = 200);
double rms_difference(const std::function<double(double)>& f, const std::function<double(double)>& g,
                      double lo, double hi, int n = 200);

struct AnovaTable {
    int factor_df = 0;
    double factor_ss = 0.0;
    double factor_ms = 0.0;
    int residual_df = 0;
    double residual_ss = 0.0;
    double residual_ms = 0.0;
    double f_statistic = 0.0;
    double critical_value = 0.0;
    double alpha = 0.05;
    bool reject = false;

    static AnovaTable from_sums(double factor_ss, int factor_df, double residual_ss,
                                int residual_df, double alpha = 0.05);
};

struct Group {
    std::string id;
    std::vector<double> values;
};

AnovaTable one_way_anova(const std::vector<Group>& groups, double alpha = 0.05);

double f_critical(int df1, int df2, double alpha);

}  // namespace fragscale
