#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lse/acquisition.hpp"
#include "lse/parallel.hpp"
#include "lse/sobol.hpp"

namespace lse {

namespace {

Eigen::VectorXd random_feasible(const DomainSpec& dom, Rng& rng) {
  const int d = dom.dim();
  Eigen::VectorXd x(d);
  for (int tries = 0; tries < 4096; ++tries) {
    for (int i = 0; i < d; ++i)
      x[i] = rng.uniform(dom.box(i, 0), dom.box(i, 1));
    if (dom.contains(x)) return x;
  }
  throw std::invalid_argument("ga: could not sample a feasible point");
}

}  // namespace

GaResult ga_maximize(const std::function<double(const Eigen::VectorXd&)>& score,
                     const DomainSpec& domain, Rng& rng,
                     const GaOptions& opts) {
  const int d = domain.dim();
  const Eigen::VectorXd widths = domain.widths();

  // quasi-random reference sample; its best point both seeds the
  // population and provides the returned lower bound
  std::vector<Eigen::VectorXd> ref;
  {
    Sobol sob(d, rng.integer() | 1ull);
    int emitted = 0;
    while (static_cast<int>(ref.size()) < opts.reference &&
           emitted < 64 * opts.reference) {
      Eigen::VectorXd u = sob.next();
      ++emitted;
      Eigen::VectorXd x(d);
      for (int i = 0; i < d; ++i)
        x[i] = domain.box(i, 0) + widths[i] * u[i];
      if (domain.contains(x)) ref.push_back(std::move(x));
    }
    if (ref.empty()) ref.push_back(random_feasible(domain, rng));
  }
  Eigen::VectorXd ref_scores(ref.size());
  par::parallel_for(ref.size(), [&](std::size_t i) {
    ref_scores[static_cast<Eigen::Index>(i)] = score(ref[i]);
  });
  Eigen::Index ref_best_idx = 0;
  ref_scores.maxCoeff(&ref_best_idx);

  const int pop_n = std::max(opts.population, 4);
  std::vector<Eigen::VectorXd> pop(pop_n);
  pop[0] = ref[static_cast<std::size_t>(ref_best_idx)];
  for (int i = 1; i < pop_n; ++i) pop[i] = random_feasible(domain, rng);

  Eigen::VectorXd fitness(pop_n);
  auto evaluate = [&]() {
    par::parallel_for(static_cast<std::size_t>(pop_n), [&](std::size_t i) {
      fitness[static_cast<Eigen::Index>(i)] = score(pop[i]);
    });
  };
  evaluate();

  Eigen::VectorXd best_x = pop[0];
  double best = fitness[0];
  auto track_best = [&]() {
    Eigen::Index idx = 0;
    const double gen_best = fitness.maxCoeff(&idx);
    if (gen_best > best) {
      best = gen_best;
      best_x = pop[idx];
    }
  };
  track_best();

  auto tournament = [&]() -> const Eigen::VectorXd& {
    Eigen::Index a = static_cast<Eigen::Index>(rng.index(pop_n));
    for (int k = 1; k < 3; ++k) {
      const Eigen::Index b = static_cast<Eigen::Index>(rng.index(pop_n));
      if (fitness[b] > fitness[a]) a = b;
    }
    return pop[a];
  };

  int stall = 0;
  double stall_ref = best;
  int gen = 0;
  for (; gen < opts.generations; ++gen) {
    std::vector<Eigen::VectorXd> next(pop_n);
    // elitism: carry the two best forward
    Eigen::Index i1 = 0;
    fitness.maxCoeff(&i1);
    next[0] = pop[i1];
    next[1] = best_x;

    const double anneal = 1.0 - 0.5 * static_cast<double>(gen) /
                                    static_cast<double>(opts.generations);
    for (int i = 2; i < pop_n; ++i) {
      const Eigen::VectorXd& p1 = tournament();
      const Eigen::VectorXd& p2 = tournament();
      Eigen::VectorXd child = p1;
      if (rng.uniform() < 0.9) {
        for (int tries = 0; tries < 10; ++tries) {
          const double beta = rng.uniform();
          child = beta * p1 + (1.0 - beta) * p2;
          if (domain.contains(child)) break;
          child = p1;
        }
      }
      // gaussian mutation, annealed, feasibility by retry
      Eigen::VectorXd mutated = child;
      for (int tries = 0; tries < 10; ++tries) {
        mutated = child;
        bool any = false;
        for (int k = 0; k < d; ++k) {
          if (rng.uniform() < 0.35) {
            mutated[k] += 0.15 * widths[k] * anneal * rng.normal();
            any = true;
          }
        }
        if (!any) break;
        mutated = domain.clamp_box(std::move(mutated));
        if (domain.contains(mutated)) {
          child = mutated;
          break;
        }
      }
      next[i] = std::move(child);
    }
    pop = std::move(next);
    evaluate();
    track_best();

    if (best - stall_ref < opts.tol) {
      if (++stall >= opts.stall) {
        ++gen;
        break;
      }
    } else {
      stall = 0;
      stall_ref = best;
    }
  }

  GaResult res;
  res.generations = gen;
  if (ref_scores[ref_best_idx] > best) {
    res.x = ref[static_cast<std::size_t>(ref_best_idx)];
    res.score = ref_scores[ref_best_idx];
  } else {
    res.x = best_x;
    res.score = best;
  }
  return res;
}

}  // namespace lse
