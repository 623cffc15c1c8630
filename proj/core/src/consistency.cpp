#include "tnl/consistency.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <stdexcept>

#include "tnl/parallel.hpp"
#include "tnl/rng.hpp"
#include "tnl/sobol.hpp"

namespace tnl {

namespace {

constexpr std::uint64_t kChunkSize = 16384;
constexpr unsigned kSobolShifts = 16;

struct ChunkStat {
  double sum = 0.0;
  double sum_sq = 0.0;
};

ConsistencyEstimate monte_carlo(const CompiledFormula& cf, TNormFamily fam,
                                const IntegrationConfig& cfg) {
  const std::uint64_t n = cfg.samples;
  const std::size_t k = cf.arity();
  const std::uint64_t n_chunks = (n + kChunkSize - 1) / kChunkSize;
  std::vector<ChunkStat> stats(n_chunks);

  parallel_chunks(n_chunks, cfg.workers, [&](std::size_t chunk) {
    CounterRng rng(cfg.seed, chunk);
    const std::uint64_t begin = chunk * kChunkSize;
    const std::uint64_t end = std::min(begin + kChunkSize, n);
    std::vector<double> point(k);
    ChunkStat stat;
    for (std::uint64_t i = begin; i < end; ++i) {
      for (std::size_t d = 0; d < k; ++d) point[d] = rng.next_unit();
      const double v = cf.eval(fam, point);
      stat.sum += v;
      stat.sum_sq += v * v;
    }
    stats[chunk] = stat;
  });

  double sum = 0.0;
  double sum_sq = 0.0;
  for (const ChunkStat& s : stats) {
    sum += s.sum;
    sum_sq += s.sum_sq;
  }
  const double nd = static_cast<double>(n);
  const double mean = sum / nd;
  double std_error = 0.0;
  if (n > 1) {
    const double var = std::max(0.0, (sum_sq - nd * mean * mean) / (nd - 1.0));
    std_error = std::sqrt(var / nd);
  }
  return {mean, std_error, n, IntegrationMethod::MonteCarlo};
}

// Randomized quasi-Monte Carlo: one digital sequence per shift, each shift
// rotated by an independent uniform offset (mod 1). The value is the mean of
// the per-shift estimates; the error bar is their spread over the shifts.
ConsistencyEstimate low_discrepancy(const CompiledFormula& cf, TNormFamily fam,
                                    const IntegrationConfig& cfg) {
  const std::size_t k = cf.arity();
  if (k > SobolSequence::max_dimension()) {
    throw std::invalid_argument(
        "low-discrepancy integration supports at most " +
        std::to_string(SobolSequence::max_dimension()) + " atoms; use monte-carlo");
  }
  const std::uint64_t per_shift = std::max<std::uint64_t>(1, cfg.samples / kSobolShifts);
  const std::uint64_t n_chunks_per_shift = (per_shift + kChunkSize - 1) / kChunkSize;
  const std::uint64_t total_chunks = n_chunks_per_shift * kSobolShifts;

  std::vector<double> shifts(static_cast<std::size_t>(kSobolShifts) * k);
  for (unsigned s = 0; s < kSobolShifts; ++s) {
    CounterRng rng(cfg.seed, 0x5348494654ull + s);  // shift stream
    for (std::size_t d = 0; d < k; ++d) shifts[s * k + d] = rng.next_unit();
  }

  std::vector<double> chunk_sums(total_chunks, 0.0);
  parallel_chunks(total_chunks, cfg.workers, [&](std::size_t flat) {
    const unsigned shift = static_cast<unsigned>(flat / n_chunks_per_shift);
    const std::uint64_t chunk = flat % n_chunks_per_shift;
    const std::uint64_t begin = chunk * kChunkSize;
    const std::uint64_t end = std::min(begin + kChunkSize, per_shift);
    SobolSequence seq(static_cast<unsigned>(k));
    seq.seek(begin);
    std::vector<double> raw(k);
    std::vector<double> point(k);
    const double* offset = shifts.data() + static_cast<std::size_t>(shift) * k;
    double sum = 0.0;
    for (std::uint64_t i = begin; i < end; ++i) {
      seq.next(raw);
      for (std::size_t d = 0; d < k; ++d) {
        double x = raw[d] + offset[d];
        if (x >= 1.0) x -= 1.0;
        point[d] = x;
      }
      sum += cf.eval(fam, point);
    }
    chunk_sums[flat] = sum;
  });

  double estimates[kSobolShifts];
  for (unsigned s = 0; s < kSobolShifts; ++s) {
    double sum = 0.0;
    for (std::uint64_t c = 0; c < n_chunks_per_shift; ++c) {
      sum += chunk_sums[s * n_chunks_per_shift + c];
    }
    estimates[s] = sum / static_cast<double>(per_shift);
  }
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= kSobolShifts;
  double var = 0.0;
  for (double e : estimates) var += (e - mean) * (e - mean);
  var /= (kSobolShifts - 1);
  const double std_error = std::sqrt(var / kSobolShifts);
  return {mean, std_error, per_shift * kSobolShifts, IntegrationMethod::LowDiscrepancy};
}

ConsistencyEstimate grid_midpoint(const CompiledFormula& cf, TNormFamily fam,
                                  const IntegrationConfig& cfg) {
  const std::size_t k = cf.arity();
  if (k > 4) {
    throw std::invalid_argument("grid integration is limited to 4 atoms; got " +
                                std::to_string(k));
  }
  const std::uint64_t m = cfg.samples;  // points per dimension
  std::uint64_t total = 1;
  for (std::size_t d = 0; d < k; ++d) total *= m;

  const std::uint64_t n_chunks = (total + kChunkSize - 1) / kChunkSize;
  std::vector<double> sums(n_chunks, 0.0);
  parallel_chunks(n_chunks, cfg.workers, [&](std::size_t chunk) {
    const std::uint64_t begin = chunk * kChunkSize;
    const std::uint64_t end = std::min(begin + kChunkSize, total);
    std::vector<double> point(k);
    double sum = 0.0;
    for (std::uint64_t flat = begin; flat < end; ++flat) {
      std::uint64_t rest = flat;
      for (std::size_t d = 0; d < k; ++d) {
        point[d] = (static_cast<double>(rest % m) + 0.5) / static_cast<double>(m);
        rest /= m;
      }
      sum += cf.eval(fam, point);
    }
    sums[chunk] = sum;
  });
  double sum = 0.0;
  for (double s : sums) sum += s;
  return {sum / static_cast<double>(total), 0.0, total, IntegrationMethod::Grid};
}

}  // namespace

std::string_view method_name(IntegrationMethod m) {
  switch (m) {
    case IntegrationMethod::MonteCarlo: return "mc";
    case IntegrationMethod::LowDiscrepancy: return "sobol";
    case IntegrationMethod::Grid: return "grid";
  }
  return "?";
}

std::optional<IntegrationMethod> method_from_name(std::string_view name) {
  if (name == "mc" || name == "monte-carlo") return IntegrationMethod::MonteCarlo;
  if (name == "sobol" || name == "low-discrepancy") return IntegrationMethod::LowDiscrepancy;
  if (name == "grid") return IntegrationMethod::Grid;
  return std::nullopt;
}

ConsistencyEstimate consistency(const Formula& f, TNormFamily fam,
                                const IntegrationConfig& cfg) {
  if (cfg.samples < 1) throw std::invalid_argument("samples must be >= 1");
  const CompiledFormula cf(f);
  switch (cfg.method) {
    case IntegrationMethod::MonteCarlo:
      return monte_carlo(cf, fam, cfg);
    case IntegrationMethod::LowDiscrepancy:
      return low_discrepancy(cf, fam, cfg);
    case IntegrationMethod::Grid:
      return grid_midpoint(cf, fam, cfg);
  }
  throw std::logic_error("unknown integration method");
}

ConsistencyEstimate self_consistency(const Formula& f, TNormFamily fam,
                                     const IntegrationConfig& cfg) {
  return consistency(Formula::biconditional(f, f), fam, cfg);
}

ExactRational sproduct_monotone_conjunction_selfconsistency(unsigned n) {
  if (n == 0) throw std::invalid_argument("conjunction size must be >= 1");
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  auto power = [&](unsigned base) -> cpp_int {
    const cpp_int b(base);
    return cpp_int(boost::multiprecision::pow(b, n));
  };
  const cpp_rational value = 1 - cpp_rational(2, power(2)) + cpp_rational(3, power(3)) -
                             cpp_rational(2, power(4)) + cpp_rational(1, power(5));
  ExactRational out;
  out.numerator = boost::multiprecision::numerator(value).str();
  out.denominator = boost::multiprecision::denominator(value).str();
  out.value = value.convert_to<double>();
  return out;
}

}  // namespace tnl
