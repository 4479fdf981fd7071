#include "prenet/pairgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "prenet/errors.hpp"

namespace prenet {
namespace {

void check_eps(double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("contamination must lie in [0, 1)");
}

void require_pools(const TrainingPools& pools) {
  if (pools.anomalies.empty()) throw DomainError("labeled anomaly pool is empty");
  if (pools.unlabeled.empty()) throw DomainError("unlabeled pool is empty");
}

std::size_t pick(const std::vector<std::size_t>& pool, Rng& rng) {
  return pool[static_cast<std::size_t>(rng.below(pool.size()))];
}

// Little-endian base-1e9 limbs.
using BigUint = std::vector<std::uint32_t>;
constexpr std::uint64_t kLimbBase = 1'000'000'000ULL;

BigUint big_from(std::uint64_t v) {
  BigUint out;
  do {
    out.push_back(static_cast<std::uint32_t>(v % kLimbBase));
    v /= kLimbBase;
  } while (v);
  return out;
}

BigUint big_mul(const BigUint& a, const BigUint& b) {
  std::vector<unsigned __int128> acc(a.size() + b.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      acc[i + j] += static_cast<unsigned __int128>(a[i]) * b[j];
  BigUint out(acc.size(), 0);
  unsigned __int128 carry = 0;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const unsigned __int128 v = acc[i] + carry;
    out[i] = static_cast<std::uint32_t>(v % kLimbBase);
    carry = v / kLimbBase;
  }
  while (out.size() > 1 && out.back() == 0) out.pop_back();
  return out;
}

std::string big_to_string(const BigUint& v) {
  std::string s = std::to_string(v.back());
  char buf[16];
  for (std::size_t i = v.size() - 1; i-- > 0;) {
    std::snprintf(buf, sizeof buf, "%09u", v[i]);
    s += buf;
  }
  return s;
}

}  // namespace

void OrdinalLabels::validate() const {
  if (!(std::isfinite(c1) && std::isfinite(c2) && std::isfinite(c3)))
    throw ConfigError("ordinal labels must be finite");
  if (!(c1 > c2 && c2 > c3 && c3 >= 0.0))
    throw ConfigError("ordinal labels must satisfy c1 > c2 > c3 >= 0, got " + to_string());
}

OrdinalLabels OrdinalLabels::parse(const std::string& text) {
  std::stringstream ss(text);
  std::string part;
  std::vector<double> v;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (part.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError("cannot parse ordinal label '" + part + "'");
    }
  }
  if (v.size() != 3) throw ConfigError("expected three ordinal labels 'c1,c2,c3'");
  OrdinalLabels l{v[0], v[1], v[2]};
  l.validate();
  return l;
}

std::string OrdinalLabels::to_string() const {
  std::ostringstream os;
  os << c1 << ',' << c2 << ',' << c3;
  return os.str();
}

std::size_t PairBatch::count(RowClass c) const {
  return static_cast<std::size_t>(std::count(classes.begin(), classes.end(), c));
}

PairBatch sample_pair_batch(const TrainingPools& pools, std::size_t batch_size,
                            const PairTargets& targets, Rng& rng) {
  if (batch_size < 4 || batch_size % 4 != 0)
    throw ArgumentError("pair batch size must be a positive multiple of 4, got " +
                        std::to_string(batch_size));
  require_pools(pools);

  const std::size_t d = pools.dim();
  const std::size_t quarter = batch_size / 4;
  PairBatch batch;
  batch.left = Matrix(batch_size, d);
  batch.right = Matrix(batch_size, d);
  batch.targets.resize(batch_size);
  batch.classes.resize(batch_size);
  batch.left_index.resize(batch_size);
  batch.right_index.resize(batch_size);

  for (std::size_t r = 0; r < batch_size; ++r) {
    RowClass cls = r < quarter ? RowClass::AA : r < 2 * quarter ? RowClass::AU : RowClass::UU;
    const auto& left_pool = cls == RowClass::UU ? pools.unlabeled : pools.anomalies;
    const auto& right_pool = cls == RowClass::AA ? pools.anomalies : pools.unlabeled;
    const std::size_t li = pick(left_pool, rng);
    const std::size_t ri = pick(right_pool, rng);
    std::ranges::copy(pools.store.row(li), batch.left.row(r).begin());
    std::ranges::copy(pools.store.row(ri), batch.right.row(r).begin());
    batch.left_index[r] = li;
    batch.right_index[r] = ri;
    batch.classes[r] = cls;
    batch.targets[r] = cls == RowClass::AA ? targets.aa : cls == RowClass::AU ? targets.au : targets.uu;
  }
  return batch;
}

PairBatch sample_instance_batch(const TrainingPools& pools, std::size_t batch_size,
                                double anomaly_target, double unlabeled_target, Rng& rng) {
  if (batch_size < 2 || batch_size % 2 != 0)
    throw ArgumentError("instance batch size must be a positive even number, got " +
                        std::to_string(batch_size));
  require_pools(pools);

  const std::size_t half = batch_size / 2;
  PairBatch batch;
  batch.left = Matrix(batch_size, pools.dim());
  batch.right = Matrix(batch_size, 0);
  batch.targets.resize(batch_size);
  batch.classes.resize(batch_size);
  batch.left_index.resize(batch_size);
  batch.right_index.assign(batch_size, static_cast<std::size_t>(-1));
  for (std::size_t r = 0; r < batch_size; ++r) {
    const bool anomaly = r < half;
    const std::size_t i = pick(anomaly ? pools.anomalies : pools.unlabeled, rng);
    std::ranges::copy(pools.store.row(i), batch.left.row(r).begin());
    batch.left_index[r] = i;
    batch.classes[r] = anomaly ? RowClass::A : RowClass::U;
    batch.targets[r] = anomaly ? anomaly_target : unlabeled_target;
  }
  return batch;
}

std::string training_pair_space_size(std::uint64_t k, std::uint64_t n) {
  const BigUint kb = big_from(k), nb = big_from(n);
  const BigUint k3 = big_mul(big_mul(kb, kb), kb);
  const BigUint n3 = big_mul(big_mul(nb, nb), nb);
  return big_to_string(big_mul(k3, n3));
}

RelationProportions expected_true_relation_proportions(double eps) {
  check_eps(eps);
  return {0.25 + 0.25 * eps + 0.5 * eps * eps,
          0.25 + 0.75 * eps - eps * eps,
          0.5 - eps + 0.5 * eps * eps};
}

double mislabel_fraction(double eps) {
  check_eps(eps);
  return 2.0 * eps - eps * eps;
}

ExpectedScores expected_scores(const OrdinalLabels& labels, double eps) {
  check_eps(eps);
  labels.validate();
  return {(labels.c1 + labels.c2) / 2.0, (labels.c2 + labels.c3 - 2.0 * eps * labels.c1) / 2.0};
}

}  // namespace prenet
