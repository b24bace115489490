#include "gatelab/optimizers.hpp"

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/random/beta_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gatelab/rng.hpp"
#include "kernels/kernels.hpp"

namespace gatelab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * boost::math::constants::pi<double>()); }

void validate(const GaussianReportPolicy& policy) {
  if (!(policy.sd > 0)) throw std::invalid_argument("policy sd must be positive");
  if (!std::isfinite(policy.mean)) throw std::invalid_argument("policy mean must be finite");
}

}  // namespace

GradientEstimate mc_gradient_at(const GaussianReportPolicy& policy, const PayoffFn& payoff, std::size_t n_samples,
                                std::uint64_t seed, Execution exec) {
  validate(policy);
  if (n_samples < 2) throw std::invalid_argument("gradient estimate needs at least two samples");
  const auto m = exec.is_serial() ? kernels::score_moments_serial(policy, payoff, n_samples, seed)
                                  : kernels::score_moments_omp(policy, payoff, n_samples, seed, exec.threads);
  const double n = static_cast<double>(n_samples);
  const double mean = m.sum / n;
  const double var = std::max(0.0, (m.sum_sq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

double analytic_gradient_step_gate(double p, double sigma, double r_min, double w_C, double w_A, double R) {
  if (!(sigma > 0)) throw std::invalid_argument("sigma must be positive");
  if (!(w_C > 0)) throw std::invalid_argument("w_C must be positive");
  return w_A * R * normal_pdf((r_min - p) / sigma) / sigma;
}

bool clipping_negligible(const GaussianReportPolicy& policy) {
  return policy.mean - 4 * policy.sd >= 0.0 && policy.mean + 4 * policy.sd <= 1.0;
}

double smoothed_objective(const GaussianReportPolicy& policy, const PayoffFn& payoff) {
  validate(policy);
  auto integrand = [&](double z) {
    return payoff(std::clamp(policy.mean + policy.sd * z, 0.0, 1.0)) * normal_pdf(z);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -10.0, 10.0, 20, 1e-13);
}

double fd_gradient(const GaussianReportPolicy& policy, const PayoffFn& payoff, double h) {
  const double up = smoothed_objective({policy.mean + h, policy.sd}, payoff);
  const double down = smoothed_objective({policy.mean - h, policy.sd}, payoff);
  return (up - down) / (2.0 * h);
}

CovarianceCheck covariance_positivity_check(const LogConcaveDist& dist, const std::function<double(double)>& f,
                                            std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 2) throw std::invalid_argument("covariance check needs at least two samples");
  Engine eng = make_engine({stream::covariance, seed});
  auto draw = std::visit(
      overloaded{
          [](const UniformDist& u) -> std::function<double(Engine&)> {
            if (!(u.hi > u.lo)) throw std::invalid_argument("uniform support must be non-empty");
            return [d = boost::random::uniform_real_distribution<double>(u.lo, u.hi)](Engine& e) mutable {
              return d(e);
            };
          },
          [](const GaussianDist& g) -> std::function<double(Engine&)> {
            if (!(g.sd > 0)) throw std::invalid_argument("gaussian sd must be positive");
            return [d = boost::random::normal_distribution<double>(g.mean, g.sd)](Engine& e) mutable {
              return d(e);
            };
          },
          [](const BetaDist& b) -> std::function<double(Engine&)> {
            if (!(b.alpha >= 1 && b.beta >= 1))
              throw std::invalid_argument("beta parameters must be >= 1 for log-concavity");
            return [d = boost::random::beta_distribution<double>(b.alpha, b.beta)](Engine& e) mutable {
              return d(e);
            };
          },
      },
      dist);

  std::vector<double> x(n_samples), fx(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    x[i] = draw(eng);
    fx[i] = f(x[i]);
  }
  const double n = static_cast<double>(n_samples);
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double mf = std::accumulate(fx.begin(), fx.end(), 0.0) / n;
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double d = (fx[i] - mf) * (x[i] - mx);
    s += d;
    s2 += d * d;
  }
  const double cov = s / (n - 1.0);
  const double mean_d = s / n;
  const double se = std::sqrt(std::max(0.0, (s2 / n - mean_d * mean_d) / n));
  return {cov, se, cov - 3.0 * se > 0.0};
}

namespace {

std::vector<double> gradient_ascent(const PayoffFn& V, const GradientAscent& g, double start, std::uint64_t seed) {
  if (!(g.sigma > 0 && g.step > 0 && g.iterations >= 0 && g.pairs_per_iteration >= 1))
    throw std::invalid_argument("gradient ascent needs positive sigma, step and sample size");
  std::vector<double> path{std::clamp(start, 0.0, 1.0)};
  double mu = path.back();
  for (int t = 0; t < g.iterations; ++t) {
    Engine eng = make_engine({stream::ascent, seed, static_cast<std::uint64_t>(t)});
    boost::random::normal_distribution<double> normal;
    double acc = 0.0;
    for (std::size_t k = 0; k < g.pairs_per_iteration; ++k) {
      const double z = normal(eng);
      const double up = V(std::clamp(mu + g.sigma * z, 0.0, 1.0));
      const double down = V(std::clamp(mu - g.sigma * z, 0.0, 1.0));
      acc += (up - down) * z / (2.0 * g.sigma);
    }
    mu = std::clamp(mu + g.step * acc / static_cast<double>(g.pairs_per_iteration), 0.0, 1.0);
    path.push_back(mu);
  }
  return path;
}

std::vector<double> evolve(const PayoffFn& V, const Evolutionary& es, double start, std::uint64_t seed) {
  if (es.parents < 1 || es.offspring < es.parents)
    throw std::invalid_argument("evolutionary method needs 1 <= parents <= offspring");
  if (!(es.mutation_sd > 0 && es.min_mutation > 0 && es.learning_rate >= 0))
    throw std::invalid_argument("mutation scales must be positive");
  struct Individual {
    double x, sd, value;
  };
  std::vector<Individual> parents(es.parents, {std::clamp(start, 0.0, 1.0), es.mutation_sd, 0.0});
  std::vector<double> path{parents.front().x};
  std::vector<Individual> kids(es.offspring);
  std::vector<std::size_t> order(es.offspring);

  Engine eng = make_engine({stream::ascent, seed, 0xe5});
  boost::random::normal_distribution<double> normal;
  for (int gen = 0; gen < es.generations; ++gen) {
    for (std::size_t k = 0; k < es.offspring; ++k) {
      const auto& mom = parents[k % es.parents];
      const double sd = std::max(es.min_mutation, mom.sd * std::exp(es.learning_rate * normal(eng)));
      const double x = std::clamp(mom.x + sd * normal(eng), 0.0, 1.0);
      kids[k] = {x, sd, V(x)};
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return kids[a].value > kids[b].value; });
    double mean = 0.0;
    for (std::size_t i = 0; i < es.parents; ++i) {
      parents[i] = kids[order[i]];
      mean += parents[i].x;
    }
    path.push_back(mean / static_cast<double>(es.parents));
  }
  return path;
}

}  // namespace

std::vector<double> ascend(const PayoffFn& payoff, const AscentMethod& method, double start, std::uint64_t seed) {
  return std::visit(overloaded{
                        [&](const GradientAscent& g) { return gradient_ascent(payoff, g, start, seed); },
                        [&](const Evolutionary& e) { return evolve(payoff, e, start, seed); },
                    },
                    method);
}

}  // namespace gatelab
