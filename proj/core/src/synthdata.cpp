#include "aamsupcon/synthdata.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "aamsupcon/errors.hpp"

namespace aamsupcon {

namespace {

constexpr const char* kHeaderTag = "# aamsupcon-dataset v1";

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& token, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size()) {
    throw Error(ErrorCode::kFormatError, "line " + std::to_string(line) + ": bad number '" + token + "'");
  }
  return v;
}

template <typename T>
T parse_unsigned(const std::string& token, std::size_t line) {
  T v{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::kFormatError,
                "line " + std::to_string(line) + ": bad integer '" + token + "'");
  }
  return v;
}

}  // namespace

void DatasetSpec::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::kInvalidSpec, field + " " + why);
  };
  if (num_speakers < 2) fail("num_speakers", "must be >= 2, got " + std::to_string(num_speakers));
  if (utterances_per_speaker < 2) {
    fail("utterances_per_speaker", "must be >= 2, got " + std::to_string(utterances_per_speaker));
  }
  if (feature_dim < 2) fail("feature_dim", "must be >= 2, got " + std::to_string(feature_dim));
  if (!(spread >= 0.0)) fail("spread", "must be >= 0, got " + format_real(spread));
}

Dataset generate(const DatasetSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Dataset ds;
  ds.spec = spec;
  ds.speakers.reserve(spec.num_speakers);
  for (std::size_t s = 0; s < spec.num_speakers; ++s) {
    std::vector<double> c(spec.feature_dim);
    for (double& x : c) x = gauss(rng);
    ds.speakers.push_back({normalize(c), spec.spread});
  }

  ds.samples.reserve(spec.num_speakers * spec.utterances_per_speaker);
  for (std::size_t s = 0; s < spec.num_speakers; ++s) {
    const auto centroid = ds.speakers[s].centroid.components();
    for (std::size_t u = 0; u < spec.utterances_per_speaker; ++u) {
      Sample sample;
      sample.speaker_id = s;
      sample.features.assign(centroid.begin(), centroid.end());
      if (spec.spread > 0.0) {
        for (double& x : sample.features) x += spec.spread * gauss(rng);
        normalize_in_place(sample.features);
      }
      ds.samples.push_back(std::move(sample));
    }
  }
  return ds;
}

std::pair<std::vector<Sample>, std::vector<Sample>> split_holdout(const std::vector<Sample>& samples,
                                                                  std::size_t holdout_per_speaker) {
  std::map<Label, std::size_t> totals;
  for (const auto& s : samples) ++totals[s.speaker_id];
  for (const auto& [id, n] : totals) {
    if (n < holdout_per_speaker + 2 || holdout_per_speaker < 2) {
      throw Error(ErrorCode::kInsufficientUtterances,
                  "speaker " + std::to_string(id) + " has " + std::to_string(n) +
                      " utterances; a holdout of " + std::to_string(holdout_per_speaker) +
                      " needs >= 2 on each side");
    }
  }
  std::map<Label, std::size_t> seen;
  std::pair<std::vector<Sample>, std::vector<Sample>> out;
  for (const auto& s : samples) {
    const std::size_t k = seen[s.speaker_id]++;
    (k + holdout_per_speaker < totals[s.speaker_id] ? out.first : out.second).push_back(s);
  }
  return out;
}

void write_dataset(std::ostream& os, const DatasetSpec& spec, const std::vector<Sample>& samples) {
  os << kHeaderTag << " num_speakers=" << spec.num_speakers
     << " utterances_per_speaker=" << spec.utterances_per_speaker
     << " feature_dim=" << spec.feature_dim << " spread=" << format_real(spec.spread)
     << " seed=" << spec.seed << '\n';
  for (const auto& s : samples) {
    os << s.speaker_id << ' ' << view_tag_name(s.view_tag);
    for (double f : s.features) os << ' ' << format_real(f);
    os << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const DatasetSpec& spec,
                  const std::vector<Sample>& samples) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  write_dataset(os, spec, samples);
  if (!os) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

LoadedDataset read_dataset(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind(kHeaderTag, 0) != 0) {
    throw Error(ErrorCode::kFormatError, "missing dataset header");
  }
  LoadedDataset out;
  std::istringstream header(line.substr(std::string(kHeaderTag).size()));
  std::string field;
  std::size_t fields = 0;
  while (header >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kFormatError, "bad header field '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "num_speakers") out.spec.num_speakers = parse_unsigned<std::size_t>(value, 1);
    else if (key == "utterances_per_speaker") out.spec.utterances_per_speaker = parse_unsigned<std::size_t>(value, 1);
    else if (key == "feature_dim") out.spec.feature_dim = parse_unsigned<std::size_t>(value, 1);
    else if (key == "spread") out.spec.spread = parse_real(value, 1);
    else if (key == "seed") out.spec.seed = parse_unsigned<std::uint64_t>(value, 1);
    else throw Error(ErrorCode::kFormatError, "unknown header field '" + key + "'");
    ++fields;
  }
  if (fields != 5) throw Error(ErrorCode::kFormatError, "dataset header needs 5 fields");

  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream rec(line);
    std::string id, tag, value;
    rec >> id >> tag;
    Sample s;
    s.speaker_id = parse_unsigned<Label>(id, lineno);
    if (tag == "original") s.view_tag = ViewTag::kOriginal;
    else if (tag == "augmented") s.view_tag = ViewTag::kAugmented;
    else throw Error(ErrorCode::kFormatError, "line " + std::to_string(lineno) + ": bad view tag '" + tag + "'");
    while (rec >> value) s.features.push_back(parse_real(value, lineno));
    if (s.features.size() != out.spec.feature_dim) {
      throw Error(ErrorCode::kFormatError, "line " + std::to_string(lineno) + ": expected " +
                                               std::to_string(out.spec.feature_dim) + " features, got " +
                                               std::to_string(s.features.size()));
    }
    out.samples.push_back(std::move(s));
  }
  return out;
}

LoadedDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_dataset(is);
}

}  // namespace aamsupcon
