#pragma once

// Helpers for the plain-text key/value file formats shared by the channel,
// policy and simulator-policy parsers. Library-internal; include from src/
// only. Format: `key` tokens followed by whitespace-separated values, `#`
// comments to end of line, every key at most once.

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "sdbc/prob.hpp"

namespace sdbc::textform {

constexpr int kMaxAlphabet = 1024;

struct TokenFile {
  // key -> raw value tokens, in declaration order per key
  std::map<std::string, std::vector<std::string>> fields;
  std::vector<std::string> order;

  bool has(const std::string& key) const { return fields.count(key) != 0; }
  const std::vector<std::string>& get(const std::string& key) const;
};

TokenFile tokenize(std::istream& in);

double parse_number(const std::string& field, size_t index, const std::string& tok);

/// Single positive integer in [1, kMaxAlphabet].
int parse_size(const TokenFile& tf, const std::string& key);

std::vector<double> parse_numbers(const TokenFile& tf, const std::string& key, size_t count);

/// Integers in [lo, hi); errors cite field and entry index.
std::vector<int> parse_ints(const TokenFile& tf, const std::string& key, size_t count,
                            int lo, int hi);

/// Every row of the row-major table must be a distribution (within 1e-12).
void check_rows(const std::string& key, const std::vector<double>& v, int rows, int cols);

ProbVec parse_p_s(const TokenFile& tf, int s_size);

std::ifstream open_or_throw(const std::string& path);

}  // namespace sdbc::textform
