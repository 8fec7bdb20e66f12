#ifndef LPNF_KAM_HPP
#define LPNF_KAM_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lpnf/normalform.hpp"
#include "lpnf/resonance.hpp"

namespace lpnf {

/// Nonincreasing omega_k <= 1 with sum -ln(omega_k)/2^k below a declared cap.
/// Presets: one (omega = 1), inv_poly (c/(k+1)^tau), geometric (c 2^{-sigma k});
/// an explicit list is accepted for experiments.
class DiophantineSchedule {
  public:
    enum class Preset { one, inv_poly, geometric, list };

    static DiophantineSchedule preset_one();
    static DiophantineSchedule preset_inv_poly(double c, double tau);
    static DiophantineSchedule preset_geometric(double c, double sigma);
    static DiophantineSchedule from_list(std::vector<double> omegas);

    double omega(int k) const; // k >= 1
    Preset preset() const { return preset_; }
    double gamma = 0.1;
    double gamma_prime = 1.0;
    double partial_sum_cap = 1e3;
    int list_limit() const { return int(list_.size()); }

    /// Partial sum of -ln(omega_j)/2^j for j = 1..k; throws
    /// ScheduleNotDiophantine when the declared cap is exceeded.
    double partial_sum(int k) const;
    /// Upper bound on the tail sum_{j>k} -ln(omega_j)/2^j (closed form for
    /// presets, cap-based for lists).
    double tail_bound(int k) const;
    void validate(int k_check = 64) const;

    std::string describe() const;

  private:
    Preset preset_ = Preset::one;
    double c_ = 1.0, tau_ = 0.0, sigma_ = 0.0;
    std::vector<double> list_;
};

/// t_m = gamma omega_{k+1} / (2 l Lambda (2m+1)), m = 2^k.
double t_m(int k, const DiophantineSchedule &sched, int l, double Lambda);
/// gamma_k = (c1/(gamma^2 omega_{k+1}^2))^{-1/m} clamped to <= 1.
double gamma_k(int k, const DiophantineSchedule &sched, double c1);

struct ThetaRadii {
    double theta;
    double r[5]; // r_i = theta^i r
};
ThetaRadii theta_and_radii(int k, double r, const DiophantineSchedule &sched, double c1);

struct RadiiLimit {
    std::vector<double> R;      // R_{k_start}..R_{k_max}
    double limit_lower_bound;   // R_last * certified tail product bound
    int k1;                     // first index with certified tail product > 1/2
};
/// R_{k+1} = gamma_k^5 m^{-10/m} R_k; certifies the tail product via the
/// schedule's tail bound.
RadiiLimit radii_limit(double R0, int k_start, int k_max, const DiophantineSchedule &sched,
                       double c1);

/// c1 = 4 (gamma'/2 + p n l m_r), m_r = max_j |S_j|_r |Dpi|_r.
double c1_constant(int n, int p, int l, double m_r, double gamma_prime);
/// m_r at radius r for the given S and R.
double m_r_constant(const LinearMorphism &S, const ResonantStructure &R, double r);

/// epsilon of Lemma "epsilon-vois": gamma omega_{k+1} / (24 l Lambda (2m+1)).
double epsilon_vois(int k, const DiophantineSchedule &sched, int l, double Lambda);

/// Uniform grid over a product of rectangles in each complex u-coordinate.
/// Measure estimates are alive-count x h^{2p}.
class CompactGrid {
  public:
    struct Rect {
        double re_lo, re_hi, im_lo, im_hi;
    };
    CompactGrid(std::vector<Rect> rects, double h);

    int p() const { return int(rects_.size()); }
    double h() const { return h_; }
    double cell_volume() const;
    std::size_t size() const { return points_.size(); }
    const std::vector<std::vector<cplx>> &points() const { return points_; }

    enum class Status : std::uint8_t { alive, dead, untrusted };
    const std::vector<Status> &status() const { return status_; }
    std::vector<Status> &status() { return status_; }
    std::size_t alive_count() const;
    double alive_measure() const { return double(alive_count()) * cell_volume(); }
    double total_measure() const { return double(size()) * cell_volume(); }

  private:
    std::vector<Rect> rects_;
    double h_;
    std::vector<std::vector<cplx>> points_;
    std::vector<Status> status_;
};

struct FilterOutcome {
    std::size_t killed = 0;
    std::size_t untrusted = 0;
    // per-point diagnostics, parallel to the grid points
    std::vector<double> worst_divisor;
    std::vector<int> offending_weight; // index into the window weight list, -1 if none
    std::vector<Weight> window;
};

/// K_k filter: kills every alive point b with |sum_j a_j(b) alpha_j| <
/// gamma * omega_{k+1} for some window weight. Points outside the trust
/// radius |b - base| > trust_radius are marked untrusted instead (0 disables
/// the trust check).
FilterOutcome filter_K(CompactGrid &grid, const std::vector<Series> &a,
                       const LinearMorphism &S, int k, double gamma, double omega_next,
                       double trust_radius = 0.0);

/// Russmann Thm 17.1 bound: B d^{n-1} (1/sqrt(n) + 2d + d/theta)
/// (eps/beta)^{1/mu0} beta^{-1} ||g||, B = 3 (2 pi e)^{n/2} (mu0+1)^{mu0+2} / (mu0+1)!.
/// Requires 0 < eps <= beta/(2 mu0 + 2).
double russmann_measure_bound(double eps, double beta, int mu0, int n_real, double d,
                              double vartheta, double g_norm);

struct GammaStarInputs {
    double eps_star;
    double M;
    double a1, a2; // (omega_i/omega_i(S))^{2/mu0}, i = 1, 2
    int mu0;
    int n; // complex dimension of the ambient compact (p in application)
    double M_omega;      // sup omega_k/omega_k(S)
    double M_omega_2mu;  // sup (2^k+n+1)^{n+1} (omega_k/omega_k(S))^{2/mu0}
    double beta;
};
double gamma_star(const GammaStarInputs &in);

struct StrictDiophantineReport {
    bool decreasing_to_zero; // over the observed range
    double M_omega_2mu;
    double M_omega;
    std::vector<double> sequence; // (2^k+n+1)^{n+1} (omega_k/omega_k(S))^{2/mu0}
    std::vector<bool> omega_s_enumerated;
};

/// Evaluates the strictly-diophantine sequence to k_max. omega_S_override,
/// when given, replaces the computed omega_k(S) (tests / synthetic data).
StrictDiophantineReport strictly_diophantine_check(
    const DiophantineSchedule &sched, const LinearMorphism &S, int mu0, int k_max,
    const std::function<double(int)> &omega_S_override = nullptr);

struct NormBallReport {
    double nf_norm, dunf_norm, remainder_norm;
    double eta; // 1/(2 l |L^{-1}|)
    bool in_NF_set;     // |NF| < 1 - 1/m^3 and |D_u NF| < eta - 1/m^2
    bool in_B_set;      // |remainder| < 2^5 n / m^4
    double da_direct;   // max_j,k ||d a_j / d u_k||_t
    double da_transfer; // 2 l |L^{-1}| max_k |d NF/d u_k|_{t,r}
};

NormBallReport norm_ball_checks(const NormalizationState &st, int k,
                                const DiophantineSchedule &sched, double r);

} // namespace lpnf

#endif
