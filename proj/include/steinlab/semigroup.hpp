#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "steinlab/geometry.hpp"
#include "steinlab/measures.hpp"
#include "steinlab/verdict.hpp"

namespace steinlab {

enum class Backend { MehlerOU, Line1DPDE, SphereZonal };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);
Backend default_backend(const ModelSpace& space);

struct EngineOptions {
  double dx = 0.0;           // PDE cell width; 0 picks max(0.01, width/2000)
  double dt_max = 1e-3;      // PDE step cap, combined with dx^2
  int hermite_order = 96;    // Mehler quadrature for non-Gaussian h
  int degree = 128;          // initial spectral degree
  int max_degree = 512;
  double spectral_tail = 1e-10;
  double t_max = 400.0;      // largest de Bruijn horizon before TailTooFat
};

struct FlowSnapshot {
  double t = 0.0;
  std::vector<double> nodes;   // coordinate of each value in h_t
  std::vector<double> weights; // mu-mass of each node (sums to 1)
  std::vector<double> h_t;
  double I_t = 0.0;
  double I_error = 0.0;
  double mass = 1.0;
};

struct DeBruijn {
  double value = 0.0;
  double error = 0.0;
  double horizon = 0.0;
};

namespace detail {
class BackendImpl;
}

// Evaluator of P_t = e^{tL/2}, L = Delta - <grad V, grad>, for one backend.
class SemigroupEngine {
 public:
  SemigroupEngine(Backend backend, ModelSpace space, std::vector<double> t_grid = {}, double tol = 1e-8,
                  EngineOptions options = {});

  Backend backend() const { return backend_; }
  const ModelSpace& space() const { return space_; }
  const std::vector<double>& t_grid() const { return t_grid_; }
  double tol() const { return tol_; }
  const EngineOptions& options() const { return options_; }

  FlowSnapshot evolve(const MeasurePair& pair, double t) const;
  // (P_t f)(x) for each coordinate x in `at`; `pair` supplies the grid.
  std::vector<double> apply(const std::function<double(double)>& f, double t, std::span<const double> at,
                            const MeasurePair& pair) const;

  // Fisher information I(P_t h) along t; shares one preparation of the pair.
  std::function<double(double)> fisher_curve(const MeasurePair& pair) const;

 private:
  friend DeBruijn de_bruijn_entropy(const SemigroupEngine&, const MeasurePair&);
  friend std::vector<InequalityVerdict> fisher_decay_check(const SemigroupEngine&, const MeasurePair&, double);
  std::shared_ptr<const detail::BackendImpl> impl(const MeasurePair& pair) const;

  Backend backend_;
  ModelSpace space_;
  std::vector<double> t_grid_;
  double tol_;
  EngineOptions options_;
};

// 1/2 int_0^inf I(P_t h) dt with tail bound e^{-KT} I_0 / (2K) in the error.
DeBruijn de_bruijn_entropy(const SemigroupEngine& engine, const MeasurePair& pair);

// One verdict I_t <= e^{-K t} I_0 per time in the engine grid.
std::vector<InequalityVerdict> fisher_decay_check(const SemigroupEngine& engine, const MeasurePair& pair, double K);

}  // namespace steinlab
