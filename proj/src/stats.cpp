#include "fragscale/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fragscale {

SwebrecFit::SwebrecFit(double x_max_in, double x_50_in, double b_in)
    : x_max(x_max_in), x_50(x_50_in), b(b_in) {
    if (!(std::isfinite(x_max) && std::isfinite(x_50) && std::isfinite(b))) {
        throw std::invalid_argument("swebrec: parameters must be finite");
    }
    if (!(x_50 > 0.0 && x_max > x_50)) {
        throw std::invalid_argument("swebrec: requires x_max > x_50 > 0");
    }
    if (!(b > 0.0)) {
        throw std::invalid_argument("swebrec: requires b > 0");
    }
}

double swebrec_percent_passing(const SwebrecFit& fit, double size_mm) {
    if (!(size_mm > 0.0) || size_mm > fit.x_max) {
        throw std::domain_error("swebrec: size outside (0, x_max]");
    }
    const double ratio = std::log(fit.x_max / size_mm) / std::log(fit.x_max / fit.x_50);
    return 100.0 / (1.0 + std::pow(ratio, fit.b));
}

namespace {

struct LogParams {
    double l_max, l_50, l_b;
};

double model_cost(const LogParams& p, const SieveSeries& data, Eigen::Vector3d* grad,
                  Eigen::Matrix3d* jtj) {
    const double bb = std::exp(p.l_b);
    const double d = p.l_max - p.l_50;
    double cost = 0.0;
    if (grad) grad->setZero();
    if (jtj) jtj->setZero();
    for (const SievePoint& pt : data) {
        const double a = p.l_max - std::log(pt.size_mm);
        const double g = a / d;
        const double gb = std::pow(g, bb);
        const double denom = 1.0 + gb;
        const double r = 100.0 / denom - pt.percent_passing;
        cost += r * r;
        if (!grad) continue;
        const double dp_dg = -100.0 * bb * std::pow(g, bb - 1.0) / (denom * denom);
        Eigen::Vector3d j;
        j[0] = dp_dg * (d - a) / (d * d);
        j[1] = dp_dg * a / (d * d);
        j[2] = -100.0 * gb * std::log(g) * bb / (denom * denom);
        *grad += j * r;
        *jtj += j * j.transpose();
    }
    return cost;
}

}  // namespace

SwebrecFitResult fit_swebrec(const SieveSeries& data) {
    if (data.size() < 3) {
        throw std::invalid_argument("swebrec fit: needs at least 3 points");
    }
    SieveSeries pts = data;
    for (const SievePoint& p : pts) {
        if (!(std::isfinite(p.size_mm) && p.size_mm > 0.0)) {
            throw std::invalid_argument("swebrec fit: sizes must be positive");
        }
        if (!(p.percent_passing > 0.0 && p.percent_passing < 100.0)) {
            throw std::invalid_argument("swebrec fit: percent passing must lie in (0, 100)");
        }
    }
    std::sort(pts.begin(), pts.end(),
              [](const SievePoint& a, const SievePoint& b) { return a.size_mm < b.size_mm; });
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].size_mm == pts[i - 1].size_mm) {
            throw std::invalid_argument("swebrec fit: duplicate sieve size");
        }
    }

    const double max_size = pts.back().size_mm;
    const double min_l_max = std::log(max_size);

    // Starting point: median size from the 50% crossing, generous top size.
    double x50_init = pts[pts.size() / 2].size_mm;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double y0 = pts[i - 1].percent_passing;
        const double y1 = pts[i].percent_passing;
        if ((y0 - 50.0) * (y1 - 50.0) <= 0.0 && y0 != y1) {
            const double f = (50.0 - y0) / (y1 - y0);
            x50_init = pts[i - 1].size_mm + f * (pts[i].size_mm - pts[i - 1].size_mm);
            break;
        }
    }
    LogParams p{std::log(1.5 * max_size), std::log(std::min(x50_init, 1.25 * max_size)), std::log(2.0)};

    SwebrecFitResult result;
    const double first = pts.front().percent_passing;
    const bool all_equal = std::all_of(pts.begin(), pts.end(), [&](const SievePoint& q) {
        return q.percent_passing == first;
    });
    if (all_equal) {
        result.fit = SwebrecFit(std::exp(p.l_max), std::exp(p.l_50), std::exp(p.l_b));
        result.residual_norm = std::sqrt(model_cost(p, pts, nullptr, nullptr));
        return result;
    }

    Eigen::Vector3d grad;
    Eigen::Matrix3d jtj;
    double cost = model_cost(p, pts, &grad, &jtj);
    double lambda = 1e-3;
    const int budget = 400;
    int iter = 0;
    for (; iter < budget; ++iter) {
        Eigen::Matrix3d damped = jtj;
        for (int k = 0; k < 3; ++k) {
            damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
        }
        const Eigen::Vector3d step = damped.ldlt().solve(-grad);
        if (!step.allFinite()) {
            lambda *= 4.0;
            if (lambda > 1e14) break;
            continue;
        }
        LogParams trial{p.l_max + step[0], p.l_50 + step[1], p.l_b + step[2]};
        const bool feasible = trial.l_max > min_l_max && trial.l_max > trial.l_50 &&
                              std::isfinite(trial.l_max) && std::isfinite(trial.l_50) &&
                              std::isfinite(trial.l_b);
        const double trial_cost =
            feasible ? model_cost(trial, pts, nullptr, nullptr) : std::numeric_limits<double>::infinity();
        if (trial_cost < cost) {
            const double prev_cost = cost;
            p = trial;
            cost = model_cost(p, pts, &grad, &jtj);
            lambda = std::max(lambda / 3.0, 1e-12);
            if (step.lpNorm<Eigen::Infinity>() < 1e-12 || cost < 1e-22 ||
                prev_cost - cost <= 1e-12 * prev_cost) {
                result.converged = true;
                ++iter;
                break;
            }
        } else {
            lambda *= 4.0;
            if (lambda > 1e14) break;
        }
    }

    result.fit = SwebrecFit(std::exp(p.l_max), std::exp(p.l_50), std::exp(p.l_b));
    result.iterations = iter;
    result.residual_norm = std::sqrt(cost);
    if (!result.converged) {
        // A stationary incumbent also counts as converged: each gradient
        // component is tested against its column scale sqrt(J_k.J_k * cost),
        // which is unit-free.
        model_cost(p, pts, &grad, &jtj);
        bool stationary = true;
        for (int k = 0; k < 3; ++k) {
            const double scale = std::sqrt(jtj(k, k) * cost);
            if (std::abs(grad[k]) > 1e-6 * scale) {
                stationary = false;
                break;
            }
        }
        result.converged = stationary;
    }
    return result;
}

std::vector<ResidualPoint> percent_error_residuals(const SieveSeries& measured,
                                                   const SwebrecFit& reference) {
    std::vector<ResidualPoint> out;
    out.reserve(measured.size());
    for (const SievePoint& p : measured) {
        out.push_back({p.size_mm, p.percent_passing - swebrec_percent_passing(reference, p.size_mm)});
    }
    return out;
}

double rms_difference(const std::function<double(double)>& f, const std::function<double(double)>& g,
                      double lo, double hi, int n) {
    if (n < 2) throw std::invalid_argument("rms_difference: needs n >= 2");
    if (!(lo > 0.0 && hi > lo)) throw std::domain_error("rms_difference: needs 0 < lo < hi");
    const double llo = std::log(lo);
    const double lhi = std::log(hi);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = std::exp(llo + (lhi - llo) * i / (n - 1));
        x = std::clamp(x, lo, hi);
        const double d = f(x) - g(x);
        acc += d * d;
    }
    return std::sqrt(acc / n);
}

double curve_l2_error(const SwebrecFit& a, const SwebrecFit& b, double lo, double hi, int n) {
    if (!(lo > 0.0 && hi > lo && hi <= std::min(a.x_max, b.x_max))) {
        throw std::domain_error("curve_l2_error: domain must lie inside both curves");
    }
    return rms_difference([&](double x) { return swebrec_percent_passing(a, x); },
                          [&](double x) { return swebrec_percent_passing(b, x); }, lo, hi, n);
}

AnovaTable AnovaTable::from_sums(double factor_ss, int factor_df, double residual_ss,
                                 int residual_df, double alpha) {
    if (factor_df < 1 || residual_df < 1) {
        throw std::invalid_argument("anova: degrees of freedom must be >= 1");
    }
    AnovaTable t;
    t.factor_df = factor_df;
    t.factor_ss = factor_ss;
    t.factor_ms = factor_ss / factor_df;
    t.residual_df = residual_df;
    t.residual_ss = residual_ss;
    t.residual_ms = residual_ss / residual_df;
    if (t.factor_ms == 0.0) {
        t.f_statistic = 0.0;
    } else if (t.residual_ms == 0.0) {
        t.f_statistic = std::numeric_limits<double>::infinity();
    } else {
        t.f_statistic = t.factor_ms / t.residual_ms;
    }
    t.alpha = alpha;
    t.critical_value = f_critical(factor_df, residual_df, alpha);
    t.reject = t.f_statistic > t.critical_value;
    return t;
}

AnovaTable one_way_anova(const std::vector<Group>& groups, double alpha) {
    if (groups.size() < 2) {
        throw std::invalid_argument("anova: needs at least 2 groups");
    }
    std::size_t total = 0;
    for (const Group& g : groups) {
        if (g.values.size() < 2) {
            throw std::invalid_argument("anova: insufficient replication (group '" + g.id +
                                        "' has fewer than 2 observations)");
        }
        for (double v : g.values) {
            if (!std::isfinite(v)) throw std::invalid_argument("anova: non-finite observation");
        }
        total += g.values.size();
    }

    double grand_sum = 0.0;
    std::vector<double> means(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) {
        double s = 0.0;
        for (double v : groups[i].values) s += v;
        means[i] = s / groups[i].values.size();
        grand_sum += s;
    }
    const double grand_mean = grand_sum / total;

    double ss_factor = 0.0, ss_resid = 0.0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const double dm = means[i] - grand_mean;
        ss_factor += groups[i].values.size() * dm * dm;
        for (double v : groups[i].values) {
            const double dv = v - means[i];
            ss_resid += dv * dv;
        }
    }
    return AnovaTable::from_sums(ss_factor, static_cast<int>(groups.size()) - 1, ss_resid,
                                 static_cast<int>(total - groups.size()), alpha);
}

double f_critical(int df1, int df2, double alpha) {
    if (df1 < 1 || df2 < 1) throw std::invalid_argument("f_critical: degrees of freedom must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("f_critical: alpha must be in (0, 1)");
    const boost::math::fisher_f dist(static_cast<double>(df1), static_cast<double>(df2));
    return boost::math::quantile(boost::math::complement(dist, alpha));
}

}  // namespace fragscale
