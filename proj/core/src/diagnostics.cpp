#include "zwf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zwf/errors.hpp"

namespace zwf {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw validation_error("normal_quantile: p must be in (0, 1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                 67265.770927008700853) * r + 45921.953931549871457) * r +
               13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545703 * r + 28729.085735721942674) * r +
                 39307.89580009271061) * r + 21213.794301586595867) * r +
               5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

namespace {

void check_chains(const std::vector<Eigen::VectorXd>& chains) {
  if (chains.size() < 2)
    throw validation_error("diagnostics: need at least 2 chains");
  for (const auto& c : chains) {
    if (c.size() != chains.front().size())
      throw validation_error("diagnostics: chains must have equal lengths");
    if (c.size() < 2)
      throw validation_error("diagnostics: need more than one draw per chain");
  }
}

// Split each chain in half, pool, rank (average ties), then map ranks
// through the normal quantile of (r - 3/8)/(S + 1/4).
std::vector<Eigen::VectorXd> rank_normalize_split(
    const std::vector<Eigen::VectorXd>& chains) {
  const long half = chains.front().size() / 2;
  std::vector<Eigen::VectorXd> split;
  for (const auto& c : chains) {
    split.push_back(c.head(half));
    split.push_back(c.segment(half, half));
  }
  const std::size_t m = split.size();
  const long n = half;
  const long total = static_cast<long>(m) * n;

  struct Entry {
    double value;
    std::size_t chain;
    long idx;
  };
  std::vector<Entry> pooled;
  pooled.reserve(total);
  for (std::size_t j = 0; j < m; ++j)
    for (long i = 0; i < n; ++i) pooled.push_back({split[j][i], j, i});
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const Entry& a, const Entry& b) { return a.value < b.value; });

  std::vector<Eigen::VectorXd> z(m, Eigen::VectorXd(n));
  long i = 0;
  while (i < total) {
    long j = i;
    while (j + 1 < total && pooled[j + 1].value == pooled[i].value) ++j;
    const double avg_rank = 0.5 * (i + j) + 1.0;  // 1-based average rank
    const double zval =
        normal_quantile((avg_rank - 0.375) / (total + 0.25));
    for (long k = i; k <= j; ++k) z[pooled[k].chain][pooled[k].idx] = zval;
    i = j + 1;
  }
  return z;
}

struct Moments {
  double w = 0.0;       // mean within-chain variance
  double var_plus = 0.0;
  std::vector<double> means;
  std::vector<double> vars;
};

Moments chain_moments(const std::vector<Eigen::VectorXd>& chains) {
  Moments mo;
  const long n = chains.front().size();
  for (const auto& c : chains) {
    const double mean = c.mean();
    const double var = (c.array() - mean).square().sum() / (n - 1);
    mo.means.push_back(mean);
    mo.vars.push_back(var);
    mo.w += var;
  }
  mo.w /= static_cast<double>(chains.size());
  double grand = 0.0;
  for (double m : mo.means) grand += m;
  grand /= static_cast<double>(mo.means.size());
  double b_over_n = 0.0;
  for (double m : mo.means) b_over_n += (m - grand) * (m - grand);
  b_over_n /= static_cast<double>(mo.means.size() - 1);
  mo.var_plus = (n - 1.0) / n * mo.w + b_over_n;
  return mo;
}

}  // namespace

double split_rhat(const std::vector<Eigen::VectorXd>& chains) {
  check_chains(chains);
  const auto z = rank_normalize_split(chains);
  const Moments mo = chain_moments(z);
  if (mo.w <= 0.0) return 1.0;  // constant chains after rank transform
  return std::sqrt(mo.var_plus / mo.w);
}

double bulk_ess(const std::vector<Eigen::VectorXd>& chains) {
  check_chains(chains);
  const auto z = rank_normalize_split(chains);
  const std::size_t m = z.size();
  const long n = z.front().size();
  const Moments mo = chain_moments(z);
  if (mo.var_plus <= 0.0) return static_cast<double>(m) * n;

  // Mean autocovariance across chains, lag by lag (biased 1/n estimator).
  std::vector<double> chain_mean(m);
  for (std::size_t j = 0; j < m; ++j) chain_mean[j] = z[j].mean();
  auto mean_autocov = [&](long t) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double c = 0.0;
      for (long i = 0; i < n - t; ++i)
        c += (z[j][i] - chain_mean[j]) * (z[j][i + t] - chain_mean[j]);
      acc += c / n;
    }
    return acc / static_cast<double>(m);
  };

  // rho_t = 1 - (W - mean autocov_t) / var_plus, combined with Geyer's
  // initial monotone positive sequence over (even, odd) lag pairs.
  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (long t = 0; t + 1 < n; t += 2) {
    const double rho_even =
        t == 0 ? 1.0 : 1.0 - (mo.w - mean_autocov(t)) / mo.var_plus;
    const double rho_odd = 1.0 - (mo.w - mean_autocov(t + 1)) / mo.var_plus;
    double pair = rho_even + rho_odd;
    if (pair < 0.0) break;
    if (pair > prev_pair) pair = prev_pair;  // enforce monotone
    prev_pair = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(m) * n));
  return static_cast<double>(m) * n / tau;
}

std::vector<DiagnosticsRow> diagnostics(
    const std::vector<std::string>& names,
    const std::vector<std::vector<Eigen::VectorXd>>& chains_by_param) {
  if (names.size() != chains_by_param.size())
    throw validation_error("diagnostics: names/chains size mismatch");
  std::vector<DiagnosticsRow> rows;
  for (std::size_t p = 0; p < names.size(); ++p)
    rows.push_back({names[p], split_rhat(chains_by_param[p]),
                    bulk_ess(chains_by_param[p])});
  return rows;
}

}  // namespace zwf
