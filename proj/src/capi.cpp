#include "delayadm/delayadm.h"

#include <cstring>
#include <string>

#include "delayadm/admissibility.hpp"
#include "delayadm/error.hpp"
#include "delayadm/experiment.hpp"
#include "delayadm/semigroup.hpp"

struct dadm_system {
  delayadm::DelaySystem impl;
};

namespace {

using delayadm::cplx;

thread_local std::string last_error;

dadm_status fail(dadm_status s, const char* what) {
  last_error = what;
  return s;
}

template <class F>
dadm_status guarded(F&& f) {
  try {
    f();
    return DADM_OK;
  } catch (const delayadm::Error& e) {
    return fail(static_cast<dadm_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(DADM_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(DADM_INTERNAL_ERROR, e.what());
  }
}

delayadm::CMatrix read_matrix(const double* p, size_t rows, size_t cols) {
  delayadm::CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) {
      const size_t k = 2 * (i * cols + j);
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cplx(p[k], p[k + 1]);
    }
  }
  return m;
}

}  // namespace

extern "C" {

const char* dadm_version(void) { return delayadm::kVersion; }

const char* dadm_last_error(void) { return last_error.c_str(); }

dadm_status dadm_system_create(size_t dim, const double* a, size_t n_delays, const double* delays,
                               const double* lags, size_t inputs, const double* b, dadm_system** out) {
  if (out == nullptr || a == nullptr) return fail(DADM_INVALID_ARGUMENT, "null argument");
  if (dim == 0) return fail(DADM_DIMENSION_ERROR, "dim must be positive");
  if (n_delays > 0 && (delays == nullptr || lags == nullptr)) {
    return fail(DADM_INVALID_ARGUMENT, "delays and lags required when n_delays > 0");
  }
  if (inputs > 0 && b == nullptr) return fail(DADM_INVALID_ARGUMENT, "b required when inputs > 0");
  *out = nullptr;
  return guarded([&] {
    std::vector<delayadm::Delay> list;
    for (size_t k = 0; k < n_delays; ++k) {
      list.push_back({read_matrix(delays + 2 * k * dim * dim, dim, dim), lags[k]});
    }
    delayadm::CMatrix bm = inputs > 0 ? read_matrix(b, dim, inputs) : delayadm::CMatrix();
    *out = new dadm_system{delayadm::DelaySystem(read_matrix(a, dim, dim), std::move(list), std::move(bm))};
  });
}

void dadm_system_destroy(dadm_system* sys) { delete sys; }

dadm_status dadm_system_dim(const dadm_system* sys, size_t* out) {
  if (sys == nullptr || out == nullptr) return fail(DADM_INVALID_ARGUMENT, "null argument");
  *out = static_cast<size_t>(sys->impl.dim());
  return DADM_OK;
}

dadm_status dadm_system_omega0(const dadm_system* sys, double* out) {
  if (sys == nullptr || out == nullptr) return fail(DADM_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = sys->impl.omega0(); });
}

dadm_status dadm_simulate_head(const dadm_system* sys, const double* x, double t_end, int m,
                               double* head_out) {
  if (sys == nullptr || x == nullptr || head_out == nullptr) return fail(DADM_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const int n = sys->impl.dim();
    delayadm::CVector x0(n);
    for (int i = 0; i < n; ++i) x0(i) = cplx(x[2 * i], x[2 * i + 1]);
    const delayadm::GridSpec grid{m, 0.0};
    const auto traj = delayadm::simulate_steps(sys->impl, delayadm::LiftedState::constant(x0, m), {}, t_end, grid);
    const delayadm::CVector z = traj.at(t_end);
    for (int i = 0; i < n; ++i) {
      head_out[2 * i] = z(i).real();
      head_out[2 * i + 1] = z(i).imag();
    }
  });
}

dadm_status dadm_semigroup_norm(const dadm_system* sys, double t, int m, double* out) {
  if (sys == nullptr || out == nullptr) return fail(DADM_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = delayadm::semigroup_norm(sys->impl, t, delayadm::GridSpec{m, 0.0}); });
}

dadm_status dadm_resolvent_norm(const dadm_system* sys, double re, double im, double omega, double* out) {
  if (sys == nullptr || out == nullptr) return fail(DADM_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = delayadm::resolvent_norm_analytic(sys->impl, cplx(re, im), omega).weighted; });
}

dadm_status dadm_run_experiment(const char* experiment, const char* config_path, const char* out_dir,
                                int64_t seed, int refine, const double* omega, int* exit_code) {
  if (config_path == nullptr || exit_code == nullptr) return fail(DADM_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    delayadm::RunOptions opts;
    opts.experiment = experiment != nullptr ? experiment : "";
    opts.config_path = config_path;
    if (out_dir != nullptr) opts.out_dir = out_dir;
    if (seed >= 0) opts.seed = static_cast<std::uint64_t>(seed);
    opts.refine = refine;
    if (omega != nullptr) opts.omega = *omega;
    std::string message;
    *exit_code = delayadm::run_experiment(opts, &message);
    last_error = message;
  });
}

dadm_status dadm_validate_config(const char* config_path, const char* experiment, char* buf,
                                 size_t buf_size, size_t* n_problems) {
  if (config_path == nullptr) return fail(DADM_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto problems = delayadm::validate_config(config_path, experiment != nullptr ? experiment : "");
    std::string joined;
    for (const auto& p : problems) joined += p + "\n";
    if (n_problems != nullptr) *n_problems = problems.size();
    if (buf != nullptr && buf_size > 0) {
      const size_t n = std::min(joined.size(), buf_size - 1);
      std::memcpy(buf, joined.data(), n);
      buf[n] = '\0';
    }
  });
}

}  // extern "C"
