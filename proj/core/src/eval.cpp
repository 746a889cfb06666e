#include "aamsupcon/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "aamsupcon/errors.hpp"
#include "aamsupcon/geometry.hpp"
#include "aamsupcon/parallel.hpp"

namespace aamsupcon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Takes `count` items from a shuffled pool, reshuffling and cycling when the
// pool is smaller than the request.
template <typename T>
void take_cycled(std::vector<T> pool, std::size_t count, Rng& rng, std::vector<T>& out) {
  if (pool.empty()) return;
  while (count > 0) {
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t n = std::min(count, pool.size());
    out.insert(out.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
    count -= n;
  }
}

Trial parse_trial(std::istringstream& rec, std::size_t lineno) {
  long long enroll = -1, test = -1;
  int target = -1;
  if (!(rec >> enroll >> test >> target) || enroll < 0 || test < 0 || (target != 0 && target != 1)) {
    throw Error(ErrorCode::kFormatError, "trial line " + std::to_string(lineno) + " is malformed");
  }
  return {static_cast<std::size_t>(enroll), static_cast<std::size_t>(test), target == 1};
}

}  // namespace

std::size_t ScoredTrials::num_target() const noexcept {
  return static_cast<std::size_t>(std::count(is_target.begin(), is_target.end(), true));
}

std::size_t ScoredTrials::num_nontarget() const noexcept { return is_target.size() - num_target(); }

void ScoredTrials::validate() const {
  if (scores.size() != is_target.size()) {
    throw Error(ErrorCode::kDegenerateTrials, "scores and labels differ in length");
  }
  if (num_target() == 0 || num_nontarget() == 0) {
    throw Error(ErrorCode::kDegenerateTrials, "need at least one target and one non-target trial");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw Error(ErrorCode::kDegenerateTrials, "non-finite score");
  }
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (*lo == *hi) throw Error(ErrorCode::kDegenerateTrials, "all scores are equal");
}

void DcfParams::validate() const {
  if (!(p_target > 0.0 && p_target < 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "p_target must lie in (0, 1)");
  }
  if (!(c_miss > 0.0) || !(c_fa > 0.0)) throw Error(ErrorCode::kInvalidInput, "DCF costs must be > 0");
}

std::vector<Trial> build_trials(const std::vector<Sample>& dataset, std::size_t trials_per_speaker,
                                std::uint64_t seed) {
  std::map<Label, std::vector<std::size_t>> by_speaker;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_speaker[dataset[i].speaker_id].push_back(i);
  if (by_speaker.size() < 2) {
    throw Error(ErrorCode::kInsufficientSpeakers, "non-target trials need at least 2 speakers");
  }
  for (const auto& [id, utts] : by_speaker) {
    if (utts.size() < 2) {
      throw Error(ErrorCode::kInsufficientUtterances,
                  "speaker " + std::to_string(id) + " has fewer than 2 utterances");
    }
  }

  Rng rng(seed);
  std::vector<Trial> trials;
  // Non-target pairs are unordered and shared between the two speakers
  // involved, so they are tracked globally.
  std::set<std::pair<std::size_t, std::size_t>> used;
  std::map<Label, std::size_t> used_by_speaker;
  const auto mark = [&](std::size_t e, std::size_t t) {
    if (!used.insert(std::minmax(e, t)).second) return false;
    ++used_by_speaker[dataset[e].speaker_id];
    ++used_by_speaker[dataset[t].speaker_id];
    return true;
  };

  for (const auto& [id, utts] : by_speaker) {
    std::vector<Trial> targets;
    for (std::size_t a = 0; a < utts.size(); ++a) {
      for (std::size_t b = a + 1; b < utts.size(); ++b) targets.push_back({utts[a], utts[b], true});
    }
    take_cycled(std::move(targets), trials_per_speaker, rng, trials);

    std::vector<std::size_t> others;
    for (const auto& [other, o_utts] : by_speaker) {
      if (other != id) others.insert(others.end(), o_utts.begin(), o_utts.end());
    }
    const std::size_t remaining = utts.size() * others.size() - used_by_speaker[id];
    if (trials_per_speaker > remaining) {
      std::vector<Trial> fresh, all;
      for (std::size_t e : utts) {
        for (std::size_t t : others) {
          all.push_back({e, t, false});
          if (!used.contains(std::minmax(e, t))) fresh.push_back({e, t, false});
        }
      }
      std::shuffle(fresh.begin(), fresh.end(), rng);
      for (const Trial& t : fresh) mark(t.enroll, t.test);
      trials.insert(trials.end(), fresh.begin(), fresh.end());
      take_cycled(std::move(all), trials_per_speaker - fresh.size(), rng, trials);
    } else {
      std::uniform_int_distribution<std::size_t> pick_e(0, utts.size() - 1);
      std::uniform_int_distribution<std::size_t> pick_t(0, others.size() - 1);
      for (std::size_t taken = 0; taken < trials_per_speaker;) {
        const std::size_t e = utts[pick_e(rng)];
        const std::size_t t = others[pick_t(rng)];
        if (mark(e, t)) {
          trials.push_back({e, t, false});
          ++taken;
        }
      }
    }
  }
  return trials;
}

Matrix embed_dataset(const NetworkParams& params, const std::vector<Sample>& dataset,
                     EmbeddingSpace space) {
  const ForwardTrace trace = forward(params, batch_from_samples(dataset));
  return space == EmbeddingSpace::kProjection ? trace.embeddings : normalized_encoder_output(trace);
}

ScoredTrials score_trials(const Matrix& embeddings, const std::vector<Trial>& trials) {
  ScoredTrials out;
  out.scores.resize(trials.size());
  out.is_target.resize(trials.size());
  for (std::size_t k = 0; k < trials.size(); ++k) {
    const Trial& t = trials[k];
    if (t.enroll >= embeddings.rows() || t.test >= embeddings.rows()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "trial " + std::to_string(k) + " references a sample beyond " +
                      std::to_string(embeddings.rows()));
    }
    if (t.enroll == t.test) {
      throw Error(ErrorCode::kInvalidInput, "trial " + std::to_string(k) + " pairs a sample with itself");
    }
    out.is_target[k] = t.is_target;
  }
  parallel_for(trials.size(), [&](std::size_t k) {
    out.scores[k] = cosine(embeddings.row(trials[k].enroll), embeddings.row(trials[k].test));
  });
  return out;
}

ScoredTrials score_trials(const NetworkParams& params, const std::vector<Sample>& dataset,
                          const std::vector<Trial>& trials, EmbeddingSpace space) {
  return score_trials(embed_dataset(params, dataset, space), trials);
}

OperatingPoint eer(const ScoredTrials& scored) {
  scored.validate();
  const std::size_t n = scored.scores.size();
  const double n_tar = static_cast<double>(scored.num_target());
  const double n_non = static_cast<double>(scored.num_nontarget());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scored.scores[a] < scored.scores[b]; });

  // At threshold v_k: misses = targets below v_k, false alarms = non-targets at or above.
  double prev_frr = 0.0, prev_far = 1.0, prev_t = scored.scores[order[0]];
  std::size_t tar_below = 0, non_below = 0;
  std::size_t k = 0;
  while (true) {
    double t = kInf;
    if (k < n) {
      t = scored.scores[order[k]];
    }
    const double frr = static_cast<double>(tar_below) / n_tar;
    const double far = (n_non - static_cast<double>(non_below)) / n_non;
    const double d = frr - far;
    if (d >= 0.0) {
      if (d == 0.0) return {frr, t};
      const double prev_d = prev_frr - prev_far;
      const double alpha = -prev_d / (d - prev_d);
      const double rate = prev_frr + alpha * (frr - prev_frr);
      const double thr = std::isinf(t) ? prev_t : prev_t + alpha * (t - prev_t);
      return {rate, thr};
    }
    prev_frr = frr;
    prev_far = far;
    prev_t = t;
    // Move every trial tied at t below the next threshold.
    while (k < n && scored.scores[order[k]] == t) {
      (scored.is_target[order[k]] ? tar_below : non_below) += 1;
      ++k;
    }
  }
}

OperatingPoint min_dcf(const ScoredTrials& scored, const DcfParams& params) {
  scored.validate();
  params.validate();
  const std::size_t n = scored.scores.size();
  const double n_tar = static_cast<double>(scored.num_target());
  const double n_non = static_cast<double>(scored.num_nontarget());
  const double norm = std::min(params.c_miss * params.p_target, params.c_fa * (1.0 - params.p_target));
  auto cost = [&](double p_miss, double p_fa) {
    return (params.c_miss * p_miss * params.p_target + params.c_fa * p_fa * (1.0 - params.p_target)) / norm;
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scored.scores[a] < scored.scores[b]; });

  OperatingPoint best{cost(0.0, 1.0), -kInf};
  std::size_t tar_below = 0, non_below = 0;
  std::size_t k = 0;
  while (k < n) {
    const double t = scored.scores[order[k]];
    const double c = cost(static_cast<double>(tar_below) / n_tar,
                          (n_non - static_cast<double>(non_below)) / n_non);
    if (c < best.value) best = {c, t};
    while (k < n && scored.scores[order[k]] == t) {
      (scored.is_target[order[k]] ? tar_below : non_below) += 1;
      ++k;
    }
  }
  const double reject_all = cost(1.0, 0.0);
  if (reject_all < best.value) best = {reject_all, kInf};
  return best;
}

void write_trials(std::ostream& os, const std::vector<Trial>& trials) {
  for (const auto& t : trials) os << t.enroll << ' ' << t.test << ' ' << (t.is_target ? 1 : 0) << '\n';
}

std::vector<Trial> read_trials(std::istream& is) {
  std::vector<Trial> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream rec(line);
    out.push_back(parse_trial(rec, lineno));
    std::string extra;
    if (rec >> extra) throw Error(ErrorCode::kFormatError, "trial line " + std::to_string(lineno) + " has extra fields");
  }
  return out;
}

void write_scores(std::ostream& os, const std::vector<Trial>& trials, const ScoredTrials& scored) {
  if (trials.size() != scored.scores.size()) {
    throw Error(ErrorCode::kShapeMismatch, "trial and score counts differ");
  }
  char buf[32];
  for (std::size_t k = 0; k < trials.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", scored.scores[k]);
    os << trials[k].enroll << ' ' << trials[k].test << ' ' << (trials[k].is_target ? 1 : 0) << ' '
       << buf << '\n';
  }
}

std::pair<std::vector<Trial>, ScoredTrials> read_scores(std::istream& is) {
  std::pair<std::vector<Trial>, ScoredTrials> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream rec(line);
    const Trial t = parse_trial(rec, lineno);
    std::string token;
    if (!(rec >> token)) throw Error(ErrorCode::kFormatError, "score line " + std::to_string(lineno) + " lacks a score");
    std::size_t used = 0;
    double score = 0.0;
    try {
      score = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw Error(ErrorCode::kFormatError, "bad score on line " + std::to_string(lineno));
    out.first.push_back(t);
    out.second.scores.push_back(score);
    out.second.is_target.push_back(t.is_target);
  }
  return out;
}

}  // namespace aamsupcon
