#pragma once

#include <string>
#include <vector>

#include "genolm/error.hpp"
#include "genolm/rng.hpp"

namespace testing {

inline std::string random_bases(genolm::Rng& rng, std::size_t n) {
  static constexpr char kAcgt[] = "ACGT";
  std::string s(n, 'A');
  for (auto& c : s) c = kAcgt[rng.below(4)];
  return s;
}

template <typename Fn>
genolm::ErrorCode error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const genolm::Error& e) {
    return e.code();
  }
  throw std::logic_error("expected a genolm::Error");
}

inline std::string revcomp(const std::string& s) {
  std::string out(s.rbegin(), s.rend());
  for (auto& c : out) {
    switch (c) {
      case 'A': c = 'T'; break;
      case 'C': c = 'G'; break;
      case 'G': c = 'C'; break;
      case 'T': c = 'A'; break;
      default: break;
    }
  }
  return out;
}

}  // namespace testing
