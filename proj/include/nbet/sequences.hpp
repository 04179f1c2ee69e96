#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nbet/rng.hpp"
#include "nbet/word.hpp"

namespace nbet {

/// Single-consumer stream of letter indices.
class SequenceSource {
 public:
  virtual ~SequenceSource() = default;
  /// Next letter, or nullopt when a finite source is exhausted.
  virtual std::optional<std::size_t> next() = 0;
  virtual std::size_t letters() const = 0;
  virtual std::string describe() const = 0;
};

/// Base-k digits of 1, 2, 3, ... written one after another; digit d is
/// letter d.
class ChampernowneSource : public SequenceSource {
 public:
  explicit ChampernowneSource(std::size_t base) : base_(base) {
    if (base < 2) fail(ErrorKind::UnsupportedBase, "Champernowne stream needs base >= 2, got " + std::to_string(base));
  }

  std::optional<std::size_t> next() override {
    if (pos_ == digits_.size()) {
      digits_.clear();
      for (std::uint64_t n = ++counter_; n; n /= base_) digits_.push_back(static_cast<std::size_t>(n % base_));
      std::reverse(digits_.begin(), digits_.end());
      pos_ = 0;
    }
    return digits_[pos_++];
  }
  std::size_t letters() const override { return base_; }
  std::string describe() const override { return "champernowne"; }

 private:
  std::size_t base_;
  std::uint64_t counter_ = 0;
  std::vector<std::size_t> digits_;
  std::size_t pos_ = 0;
};

class PeriodicSource : public SequenceSource {
 public:
  PeriodicSource(Word period, std::size_t letters, std::string text)
      : period_(std::move(period)), letters_(letters), text_(std::move(text)) {
    if (period_.empty()) fail(ErrorKind::Usage, "periodic source needs a non-empty word");
  }
  std::optional<std::size_t> next() override {
    const std::size_t a = period_[pos_];
    pos_ = (pos_ + 1) % period_.size();
    return a;
  }
  std::size_t letters() const override { return letters_; }
  std::string describe() const override { return "periodic:" + text_; }

 private:
  Word period_;
  std::size_t letters_;
  std::string text_;
  std::size_t pos_ = 0;
};

/// A finite word read from a file; whitespace between symbols is ignored.
class FileSource : public SequenceSource {
 public:
  FileSource(const std::string& path, const Alphabet& alphabet) : letters_(alphabet.size()), path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Parse, "cannot open sequence file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (single_char_symbols(alphabet)) {
      std::string compact;
      for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
      word_ = parse_word(alphabet, compact);
    } else {
      std::istringstream ss(text);
      std::string tok;
      while (ss >> tok) {
        const Word part = parse_word(alphabet, tok);
        word_.insert(word_.end(), part.begin(), part.end());
      }
    }
  }
  std::optional<std::size_t> next() override {
    if (pos_ >= word_.size()) return std::nullopt;
    return word_[pos_++];
  }
  std::size_t letters() const override { return letters_; }
  std::string describe() const override { return "file:" + path_; }

 private:
  Word word_;
  std::size_t letters_;
  std::string path_;
  std::size_t pos_ = 0;
};

class RandomSource : public SequenceSource {
 public:
  RandomSource(std::uint64_t seed, std::size_t letters) : rng_(seed), letters_(letters), seed_(seed) {
    if (letters == 0) fail(ErrorKind::Usage, "random source needs a non-empty alphabet");
  }
  std::optional<std::size_t> next() override { return static_cast<std::size_t>(rng_.below(letters_)); }
  std::size_t letters() const override { return letters_; }
  std::string describe() const override { return "random:" + std::to_string(seed_); }

 private:
  CounterRng rng_;
  std::size_t letters_;
  std::uint64_t seed_;
};

/// champernowne | periodic:<word> | file:<path> | random:<seed>
inline std::unique_ptr<SequenceSource> make_source(const std::string& spec, const Alphabet& alphabet) {
  auto rest = [&](std::string_view prefix) { return spec.substr(prefix.size()); };
  if (spec == "champernowne") return std::make_unique<ChampernowneSource>(alphabet.size());
  if (spec.rfind("periodic:", 0) == 0) {
    const std::string w = rest("periodic:");
    return std::make_unique<PeriodicSource>(parse_word(alphabet, w), alphabet.size(), w);
  }
  if (spec.rfind("file:", 0) == 0) return std::make_unique<FileSource>(rest("file:"), alphabet);
  if (spec.rfind("random:", 0) == 0) {
    const std::string s = rest("random:");
    std::size_t used = 0;
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (s.empty() || used != s.size()) fail(ErrorKind::Usage, "bad random seed '" + s + "'");
    return std::make_unique<RandomSource>(seed, alphabet.size());
  }
  fail(ErrorKind::Usage, "unknown sequence '" + spec + "'");
}

/// The next n letters; SequenceTooShort when the source runs out.
inline Word take(SequenceSource& src, std::size_t n) {
  Word w;
  w.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto a = src.next();
    if (!a) fail(ErrorKind::SequenceTooShort, "sequence ended after " + std::to_string(k) + " symbols, " +
                                                  std::to_string(n) + " needed");
    w.push_back(*a);
  }
  return w;
}

struct BlockFrequencyReport {
  std::size_t prefix_length = 0;
  std::size_t letters = 0;
  std::vector<std::map<Word, double>> frequencies;  // [len-1]: word -> frequency
  std::vector<double> max_deviation;                // [len-1]: max |freq - k^-len|
};

/// Sliding-window frequencies of every word of length 1..maxlen in the
/// first n letters.
inline BlockFrequencyReport block_frequency_report(SequenceSource& src, std::size_t n, std::size_t maxlen) {
  if (maxlen < 1 || n < maxlen) fail(ErrorKind::Usage, "block frequency needs n >= maxlen >= 1");
  const std::size_t k = src.letters();
  if (std::pow(static_cast<double>(k), static_cast<double>(maxlen)) > 1 << 24)
    fail(ErrorKind::Usage, "too many blocks to count");
  const Word x = take(src, n);
  BlockFrequencyReport rep;
  rep.prefix_length = n;
  rep.letters = k;
  for (std::size_t len = 1; len <= maxlen; ++len) {
    std::size_t blocks = 1;
    for (std::size_t i = 0; i < len; ++i) blocks *= k;
    std::vector<std::size_t> counts(blocks, 0);
    std::size_t code = 0;
    for (std::size_t i = 0; i < n; ++i) {
      code = (code * k + x[i]) % blocks;
      if (i + 1 >= len) ++counts[code];
    }
    const double windows = static_cast<double>(n - len + 1);
    const double expected = 1.0 / static_cast<double>(blocks);
    std::map<Word, double> freq;
    double dev = 0.0;
    for (std::size_t c = 0; c < blocks; ++c) {
      Word w(len);
      for (std::size_t i = len, r = c; i-- > 0; r /= k) w[i] = r % k;
      const double f = static_cast<double>(counts[c]) / windows;
      freq[w] = f;
      dev = std::max(dev, std::fabs(f - expected));
    }
    rep.frequencies.push_back(std::move(freq));
    rep.max_deviation.push_back(dev);
  }
  return rep;
}

}  // namespace nbet
