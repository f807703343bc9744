#include "demuxsim/efficiency.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace demuxsim {

namespace {

void check_prob(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
}

}  // namespace

void SaturationParams::validate() const {
    if (!(i0 > 0.0)) throw std::invalid_argument("i0 must be > 0");
    if (!(p_sat > 0.0)) throw std::invalid_argument("p_sat must be > 0");
    if (!(eta_f > 0.0 && eta_f <= 1.0)) throw std::invalid_argument("eta_f must be in (0, 1]");
}

void StageEfficiencies::validate() const {
    check_prob(p_e, "p_e");
    check_prob(eta_b, "eta_b");
    check_prob(beta, "beta");
    check_prob(eta_oc, "eta_oc");
    check_prob(t_optics, "t_optics");
    check_prob(eta_f, "eta_f");
    check_prob(eta_fiber, "eta_fiber");
    check_prob(eta_det, "eta_det");
}

void EmitterPhysics::validate() const {
    if (!(gamma_bright > gamma_dark && gamma_dark > 0.0))
        throw std::invalid_argument("rates must satisfy gamma_bright > gamma_dark > 0");
    if (!(p_multi >= 0.0 && p_multi < 1.0))
        throw std::invalid_argument("p_multi must be in [0, 1)");
    if (!(p_blink_off >= 0.0 && p_blink_off < 1.0))
        throw std::invalid_argument("p_blink_off must be in [0, 1)");
    if (!(tau_blink_us > 0.0)) throw std::invalid_argument("tau_blink_us must be > 0");
}

double saturation_intensity(double power_nw, const SaturationParams& params) {
    if (!(power_nw >= 0.0)) throw std::invalid_argument("power must be >= 0");
    return params.i0 * params.eta_f * (1.0 - std::exp(-power_nw / params.p_sat));
}

double quantum_dot_efficiency(double p_e, double eta_b) {
    check_prob(p_e, "p_e");
    check_prob(eta_b, "eta_b");
    return p_e * eta_b;
}

double source_efficiency(const StageEfficiencies& s) {
    s.validate();
    return quantum_dot_efficiency(s.p_e, s.eta_b) * s.beta * s.eta_oc * s.t_optics * s.eta_f;
}

std::vector<RateLadderRung> rate_ladder(double f_rep_hz, const StageEfficiencies& s) {
    if (!(f_rep_hz > 0.0)) throw std::invalid_argument("f_rep must be > 0");
    s.validate();
    std::vector<RateLadderRung> rungs;
    double rate = f_rep_hz * quantum_dot_efficiency(s.p_e, s.eta_b);
    rungs.push_back({"emitted-on-line", rate});
    rate *= s.beta;
    rungs.push_back({"in-waveguide", rate});
    rate *= s.eta_oc * s.t_optics;
    rungs.push_back({"in-fiber", rate});
    rate *= s.eta_f;
    rungs.push_back({"after-filter", rate});
    rate *= s.eta_det;
    rungs.push_back({"detected", rate});
    return rungs;
}

namespace {

// Model value and gradient at one point. Parameters: i0, p_sat, eta_f.
struct EvalPoint {
    double value;
    double d_i0;
    double d_psat;
    double d_etaf;
};

EvalPoint eval_model(double power, bool filtered, double i0, double p_sat, double eta_f) {
    double e = std::exp(-power / p_sat);
    double g = 1.0 - e;
    double f = filtered ? eta_f : 1.0;
    EvalPoint out;
    out.value = i0 * f * g;
    out.d_i0 = f * g;
    out.d_psat = -i0 * f * e * power / (p_sat * p_sat);
    out.d_etaf = filtered ? i0 * g : 0.0;
    return out;
}

// Gaussian elimination with partial pivoting, n <= 3.
bool solve_dense(double a[3][3], double b[3], double x[3], int n) {
    int idx[3] = {0, 1, 2};
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a[idx[r]][col]) > std::fabs(a[idx[piv]][col])) piv = r;
        std::swap(idx[col], idx[piv]);
        double d = a[idx[col]][col];
        if (std::fabs(d) < 1e-300) return false;
        for (int r = col + 1; r < n; ++r) {
            double f = a[idx[r]][col] / d;
            for (int c = col; c < n; ++c) a[idx[r]][c] -= f * a[idx[col]][c];
            b[idx[r]] -= f * b[idx[col]];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[idx[r]];
        for (int c = r + 1; c < n; ++c) s -= a[idx[r]][c] * x[c];
        x[r] = s / a[idx[r]][r];
    }
    return true;
}

double cost_of(const std::vector<PowerSeriesPoint>& series, double i0, double p_sat,
               double eta_f) {
    double c = 0.0;
    for (const auto& pt : series) {
        double r = pt.counts_per_s - eval_model(pt.power_nw, pt.filtered, i0, p_sat, eta_f).value;
        c += r * r;
    }
    return c;
}

}  // namespace

SaturationFit fit_saturation(const std::vector<PowerSeriesPoint>& series) {
    if (series.size() < 4)
        throw std::invalid_argument("saturation fit needs at least 4 points");

    double pmin = std::numeric_limits<double>::infinity(), pmax = 0.0;
    double cmax_unfiltered = 0.0, cmax_filtered = 0.0, cmax = 0.0;
    bool any_filtered = false, any_unfiltered = false;
    for (const auto& pt : series) {
        if (!(pt.power_nw >= 0.0) || !(pt.counts_per_s >= 0.0))
            throw std::invalid_argument("power series values must be nonnegative");
        pmin = std::min(pmin, pt.power_nw);
        pmax = std::max(pmax, pt.power_nw);
        cmax = std::max(cmax, pt.counts_per_s);
        if (pt.filtered) {
            any_filtered = true;
            cmax_filtered = std::max(cmax_filtered, pt.counts_per_s);
        } else {
            any_unfiltered = true;
            cmax_unfiltered = std::max(cmax_unfiltered, pt.counts_per_s);
        }
    }
    if (pmax <= pmin)
        throw std::invalid_argument("degenerate series: all points at the same power");
    if (cmax <= 0.0)
        throw std::invalid_argument("degenerate series: all counts are zero");

    // eta_f is identifiable only when both branches are present; otherwise it
    // is pinned to 1 and i0 absorbs any filter factor.
    const bool fit_etaf = any_filtered && any_unfiltered;

    double i0 = (any_unfiltered ? cmax_unfiltered : cmax) * 1.05;
    double eta_f = fit_etaf ? std::clamp(cmax_filtered / cmax_unfiltered, 0.05, 1.0) : 1.0;
    // first power reaching 63% of the branch plateau approximates p_sat
    double p_sat = 0.5 * (pmin + pmax);
    {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& pt : series) {
            double plateau = pt.filtered ? std::max(cmax_filtered, 1e-300)
                                         : std::max(cmax_unfiltered, 1e-300);
            if (pt.counts_per_s >= 0.632 * plateau && pt.power_nw > 0.0 && pt.power_nw < best)
                best = pt.power_nw;
        }
        if (std::isfinite(best)) p_sat = best;
    }
    if (!(p_sat > 0.0)) p_sat = std::max(pmax / 3.0, 1e-6);

    const int max_iter = 200;
    const double step_tol = 1e-9;
    const int n_par = fit_etaf ? 3 : 2;

    double lambda = 1e-3;
    double cost = cost_of(series, i0, p_sat, eta_f);
    SaturationFit fit;
    fit.converged = false;

    int iter = 0;
    for (; iter < max_iter; ++iter) {
        // normal equations J^T J and J^T r for the current iterate
        double jtj[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
        double jtr[3] = {0, 0, 0};
        for (const auto& pt : series) {
            EvalPoint ev = eval_model(pt.power_nw, pt.filtered, i0, p_sat, eta_f);
            double r = pt.counts_per_s - ev.value;
            double grad[3] = {ev.d_i0, ev.d_psat, ev.d_etaf};
            for (int a = 0; a < n_par; ++a) {
                jtr[a] += grad[a] * r;
                for (int b = 0; b < n_par; ++b) jtj[a][b] += grad[a] * grad[b];
            }
        }

        // Levenberg damping on the diagonal, retry with larger lambda until
        // the step reduces the cost.
        bool stepped = false;
        double rel_step = 0.0;
        for (int tries = 0; tries < 30; ++tries) {
            double a[3][3];
            double b[3];
            for (int r = 0; r < 3; ++r) {
                b[r] = jtr[r];
                for (int c = 0; c < 3; ++c) a[r][c] = jtj[r][c];
                a[r][r] += lambda * std::max(jtj[r][r], 1e-30);
            }
            double delta[3] = {0, 0, 0};
            if (!solve_dense(a, b, delta, n_par)) {
                lambda *= 10.0;
                continue;
            }
            double ni0 = std::max(i0 + delta[0], 1e-12);
            double npsat = std::max(p_sat + delta[1], 1e-12);
            double netaf = fit_etaf ? std::clamp(eta_f + delta[2], 1e-9, 1.5) : eta_f;
            double ncost = cost_of(series, ni0, npsat, netaf);
            if (ncost <= cost) {
                rel_step = std::max({std::fabs(ni0 - i0) / std::max(i0, 1e-300),
                                     std::fabs(npsat - p_sat) / std::max(p_sat, 1e-300),
                                     std::fabs(netaf - eta_f) / std::max(eta_f, 1e-300)});
                i0 = ni0;
                p_sat = npsat;
                eta_f = netaf;
                cost = ncost;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped || rel_step < step_tol) {
            // no descending step even under heavy damping, or step below
            // tolerance: stationary point reached
            fit.converged = true;
            break;
        }
    }
    if (iter == max_iter) fit.converged = false;

    fit.params.i0 = i0;
    fit.params.p_sat = p_sat;
    fit.params.eta_f = std::min(eta_f, 1.0);
    fit.iterations = iter;
    fit.residuals.reserve(series.size());
    double norm = 0.0;
    for (const auto& pt : series) {
        double r = pt.counts_per_s - eval_model(pt.power_nw, pt.filtered, i0, p_sat, eta_f).value;
        fit.residuals.push_back(r);
        norm += r * r;
    }
    fit.residual_norm = std::sqrt(norm);
    return fit;
}

std::vector<PowerSeriesPoint> read_power_series_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty power series CSV");
    // tolerate a UTF-8 BOM and trailing CR
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "power_nW,counts_per_s,filtered")
        throw std::invalid_argument("power series CSV must start with "
                                    "'power_nW,counts_per_s,filtered'");
    std::vector<PowerSeriesPoint> out;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        PowerSeriesPoint pt;
        char c1 = 0, c2 = 0;
        int filt = -1;
        if (!(ss >> pt.power_nw >> c1 >> pt.counts_per_s >> c2 >> filt) || c1 != ',' ||
            c2 != ',' || (filt != 0 && filt != 1))
            throw std::invalid_argument("bad power series row at line " +
                                        std::to_string(line_no));
        pt.filtered = filt == 1;
        out.push_back(pt);
    }
    return out;
}

}  // namespace demuxsim
