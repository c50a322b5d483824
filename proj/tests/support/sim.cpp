#include "sim.hpp"

#include <cmath>
#include <sstream>

namespace sim {

protodown::ExpressionMatrix random_log2(std::size_t rows, std::size_t cols, double missing, std::uint64_t seed,
                                        double mu, double sd) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> val(mu, sd);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::string> r, c;
  for (std::size_t i = 0; i < rows; ++i) r.push_back("R" + std::to_string(i));
  for (std::size_t j = 0; j < cols; ++j) c.push_back("S" + std::to_string(j));
  protodown::ExpressionMatrix m(r, c, protodown::Scale::log2);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = val(rng);
      if (u(rng) >= missing) m.set(i, j, v);
    }
  }
  return m;
}

oracle::Grid to_grid(const protodown::ExpressionMatrix& m) {
  oracle::Grid g(m.rows(), std::vector<oracle::Cell>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) g[i][j] = m.get(i, j);
  return g;
}

SpikeIn spike_in(std::uint64_t seed, std::size_t proteins, std::size_t spiked) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> base(24.0, 2.0);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  const std::vector<std::string> samples = {"ctrl_1", "ctrl_2", "ctrl_3", "trt_1", "trt_2", "trt_3"};
  std::vector<std::vector<double>> v(proteins, std::vector<double>(samples.size()));
  SpikeIn out;
  out.spiked.assign(proteins, false);
  // spread the spiked rows through the table
  for (std::size_t i = 0; i < spiked; ++i) out.spiked[i * (proteins / spiked) + 3] = true;
  for (std::size_t i = 0; i < proteins; ++i) {
    const double level = base(rng);
    for (std::size_t j = 0; j < samples.size(); ++j) {
      v[i][j] = level + noise(rng) + (out.spiked[i] && j >= 3 ? 1.0 : 0.0);
    }
  }
  // missing with a logistic preference for low values; centre solved so
  // the expected missing fraction is 15%
  auto expected = [&](double centre) {
    double s = 0.0;
    for (const auto& row : v)
      for (double x : row) s += 1.0 / (1.0 + std::exp((x - centre) / 0.7));
    return s / double(proteins * samples.size());
  };
  double lo = 10.0, hi = 35.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (expected(mid) < 0.15 ? lo : hi) = mid;
  }
  const double centre = 0.5 * (lo + hi);
  std::size_t missing = 0;
  std::vector<std::vector<bool>> gone(proteins, std::vector<bool>(samples.size()));
  for (std::size_t i = 0; i < proteins; ++i) {
    for (std::size_t j = 0; j < samples.size(); ++j) {
      gone[i][j] = u(rng) < 1.0 / (1.0 + std::exp((v[i][j] - centre) / 0.7));
      missing += gone[i][j];
    }
  }
  out.missing_fraction = double(missing) / double(proteins * samples.size());

  std::ostringstream t;
  t.precision(17);
  t << "Protein IDs\tMajority protein IDs\tGene names\tProtein names\tPeptides\tUnique peptides";
  for (const auto& s : samples) t << "\tLFQ intensity " << s;
  for (const auto& s : samples) t << "\tMS/MS count " << s;
  t << "\tReverse\tPotential contaminant\tOnly identified by site\n";
  std::uniform_int_distribution<int> peps(1, 30);
  for (std::size_t i = 0; i < proteins; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "SP%05zu", i + 1);
    out.ids.push_back(id);
    const int p = peps(rng);
    t << id << "\t" << id << "\tG" << (i + 1) << "\tprotein " << (i + 1) << "\t" << p << "\t" << (p + 1) / 2;
    for (std::size_t j = 0; j < samples.size(); ++j) t << "\t" << (gone[i][j] ? 0.0 : std::exp2(v[i][j]));
    for (std::size_t j = 0; j < samples.size(); ++j) t << "\t" << (gone[i][j] ? 0 : p * 2 + int(j));
    t << "\t\t\t\n";
  }
  out.maxquant = t.str();
  return out;
}

}  // namespace sim
