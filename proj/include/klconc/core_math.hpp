#pragma once

// Scalar kernels for the multinomial likelihood-ratio statistic Z = 2n*D(phat||p)
// and its expectation: phi, binary and general KL divergence, the chain-rule
// decomposition, Bernstein polynomials of phi, the bias functions f and g, and
// chi-squared reference moments.
//
// Conventions:
//   * 0*log(0) is 0 everywhere.
//   * A positive mass on a zero-probability cell is an infinite-divergence
//     outcome, reported as +infinity, not an exception.
//   * Precondition violations throw std::domain_error / std::invalid_argument.

#include <cstdint>
#include <span>
#include <vector>

namespace klconc {

// A point of the probability simplex with its minimum mass cached.
// alpha == 0 is legal; operations that need alpha > 0 validate themselves.
class Distribution {
  public:
    explicit Distribution(std::vector<double> probs);

    int k() const { return static_cast<int>(probs_.size()); }
    double alpha() const { return alpha_; }
    const std::vector<double>& probs() const { return probs_; }
    double prob(int i) const { return probs_[static_cast<std::size_t>(i)]; }

  private:
    std::vector<double> probs_;
    double alpha_;
};

Distribution make_uniform(int k);
Distribution make_geometric(int k, double ratio = 0.5);
Distribution make_two_level(int k);
Distribution make_dirichlet(int k, std::uint64_t seed);

// A multinomial outcome; n is the total count.
class Counts {
  public:
    explicit Counts(std::vector<std::int64_t> values);

    const std::vector<std::int64_t>& values() const { return values_; }
    std::int64_t n() const { return n_; }
    int size() const { return static_cast<int>(values_.size()); }

  private:
    std::vector<std::int64_t> values_;
    std::int64_t n_;
};

// phi(x) = x*log(1/x) on [0,1], with phi(0) = phi(1) = 0 exactly.
double phi(double x);

// Binary KL divergence d(p||q) in nats; q must lie strictly inside (0,1).
double binary_kl(double p, double q);

// D(phat||p) = sum_i phat_i*log(phat_i/p_i).  Returns +infinity when some
// phat_i > 0 has p_i == 0.
double kl_divergence(std::span<const double> p_hat, const Distribution& p);

// Z = 2n*D(phat||p) for the outcome x.  Propagates the +infinity signal.
double z_statistic(const Counts& x, const Distribution& p);

struct ChainParts {
    double binary_part;       // 2n*d(phat_k||p_k)
    double conditional_part;  // 2n*(1-phat_k)*D of the reduced (k-1)-cell pair
};

// Splits Z along the last cell; binary_part + conditional_part == Z.
// The conditional part is 0 when X_k == n.  Requires k >= 3 and p_k < 1.
ChainParts chain_decompose(const Counts& x, const Distribution& p);

// Bernstein polynomial of phi: B_n(phi,x) = sum_j phi(j/n) C(n,j) x^j (1-x)^(n-j).
// Exact full sum for n <= 1e6; above that the sum is truncated to a window of
// +-max(12 sigma, 48) around the binomial mean (truncation error < 1e-12).
double bernstein_phi(std::int64_t n, double x);

// g(n) = n*E[D(phat||p)] = sum_i n*(phi(p_i) - B_n(phi,p_i));  f(n) = g(n)/n.
double g_func(std::int64_t n, const Distribution& p);
double f_func(std::int64_t n, const Distribution& p);

// E[(chi2_df)^m] = 2^m * Gamma(m + df/2) / Gamma(df/2).
// Throws std::overflow_error when the value exceeds the double range.
double chi2_raw_moment(int df, int m);

}  // namespace klconc
