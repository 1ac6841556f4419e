#include "textform.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sdbc/errors.hpp"

namespace sdbc::textform {

const std::vector<std::string>& TokenFile::get(const std::string& key) const {
  auto it = fields.find(key);
  if (it == fields.end()) throw ParseError("missing field '" + key + "'");
  return it->second;
}

namespace {

bool is_key_token(const std::string& t) {
  if (t.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(t[0])) || t[0] == '_')) return false;
  for (char c : t) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

}  // namespace

TokenFile tokenize(std::istream& in) {
  TokenFile tf;
  std::string line;
  std::string current;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      if (is_key_token(tok)) {
        if (tf.fields.count(tok)) throw ParseError("duplicate field '" + tok + "'");
        current = tok;
        tf.fields[current];
        tf.order.push_back(current);
      } else {
        if (current.empty()) throw ParseError("value '" + tok + "' before any field name");
        tf.fields[current].push_back(tok);
      }
    }
  }
  return tf;
}

double parse_number(const std::string& field, size_t index, const std::string& tok) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != tok.size() || !std::isfinite(v)) {
    throw ParseError("field '" + field + "', entry " + std::to_string(index) +
                     ": not a number: '" + tok + "'");
  }
  return v;
}

int parse_size(const TokenFile& tf, const std::string& key) {
  const auto& vals = tf.get(key);
  if (vals.size() != 1) {
    throw ParseError("field '" + key + "': expected 1 value, got " + std::to_string(vals.size()));
  }
  double v = parse_number(key, 0, vals[0]);
  int n = static_cast<int>(v);
  if (v != static_cast<double>(n) || n < 1 || n > kMaxAlphabet) {
    throw ParseError("field '" + key + "': size must be an integer in [1, " +
                     std::to_string(kMaxAlphabet) + "], got '" + vals[0] + "'");
  }
  return n;
}

std::vector<double> parse_numbers(const TokenFile& tf, const std::string& key, size_t count) {
  const auto& vals = tf.get(key);
  if (vals.size() != count) {
    throw ParseError("field '" + key + "': expected " + std::to_string(count) +
                     " values, got " + std::to_string(vals.size()));
  }
  std::vector<double> out(count);
  for (size_t i = 0; i < count; ++i) out[i] = parse_number(key, i, vals[i]);
  return out;
}

std::vector<int> parse_ints(const TokenFile& tf, const std::string& key, size_t count,
                            int lo, int hi) {
  std::vector<double> raw = parse_numbers(tf, key, count);
  std::vector<int> out(count);
  for (size_t i = 0; i < count; ++i) {
    int v = static_cast<int>(raw[i]);
    if (raw[i] != static_cast<double>(v) || v < lo || v >= hi) {
      throw ParseError("field '" + key + "', entry " + std::to_string(i) +
                       ": value out of range [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + ")");
    }
    out[i] = v;
  }
  return out;
}

void check_rows(const std::string& key, const std::vector<double>& v, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (int c = 0; c < cols; ++c) {
      double x = v[static_cast<size_t>(r) * cols + c];
      if (x < 0.0) {
        throw ParseError("field '" + key + "', entry " + std::to_string(r * cols + c) +
                         ": negative probability");
      }
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", sum);
      throw ParseError("field '" + key + "', row " + std::to_string(r) + ": sums to " + buf +
                       " (must be 1 within 1e-12)");
    }
  }
}

ProbVec parse_p_s(const TokenFile& tf, int s_size) {
  std::vector<double> ps = parse_numbers(tf, "p_s", static_cast<size_t>(s_size));
  check_rows("p_s", ps, 1, s_size);
  return ProbVec(std::move(ps));
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  return in;
}

}  // namespace sdbc::textform
