#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "dative/model.hpp"

namespace testing_helpers {

inline dative::ModelConfig tiny_config(int vocab, int d_model = 8, int layers = 2, int heads = 2, int d_ff = 16,
                                       int max_seq_len = 32) {
  dative::ModelConfig c;
  c.layers = layers;
  c.heads = heads;
  c.d_model = d_model;
  c.d_ff = d_ff;
  c.vocab_size = vocab;
  c.max_seq_len = max_seq_len;
  c.init_std = 0.3;
  return c;
}

// Randomizes every parameter, including biases and layer-norm terms.
inline void scramble(dative::LanguageModel& m, std::uint64_t seed, double scale = 0.3) {
  dative::Rng rng(seed);
  dative::NormalSampler n;
  for (auto& p : m.params()) p = scale * n(rng);
  for (const auto& t : m.layout().tensors)
    if (t.name.find("gamma") != std::string::npos)
      for (std::size_t i = 0; i < t.size(); ++i) m.params()[t.offset + i] += 1.0;
}

class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0;; ++i) {
      path_ = base / ("dative_test_" + std::to_string(::getpid()) + "_" + std::to_string(i));
      if (std::filesystem::create_directory(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_helpers
