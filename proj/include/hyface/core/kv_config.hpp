// Copyright (c) 2026 hyface authors
// Licensed under the Apache License, Version 2.0
//
// Flat `key = value` config files. Unknown keys are rejected outright:
// a silently ignored typo in a training config is the kind of failure this
// project refuses to ship.

#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hyface/core/error.hpp"
#include "hyface/core/sha256.hpp"

namespace hyface {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class KvMap {
 public:
  KvMap() = default;

  static KvMap parse(const std::string& text, const std::string& origin = "") {
    KvMap kv;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      std::string s = strip(line);
      if (s.empty() || s[0] == '#') continue;
      auto eq = s.find('=');
      if (eq == std::string::npos)
        fail(ErrorCode::ConfigParse, "config",
             origin + " line " + std::to_string(lineno) + ": expected key = value");
      std::string key = strip(s.substr(0, eq));
      std::string value = strip(s.substr(eq + 1));
      if (key.empty())
        fail(ErrorCode::ConfigParse, "config",
             origin + " line " + std::to_string(lineno) + ": empty key");
      if (kv.items_.count(key))
        fail(ErrorCode::ConfigParse, "config",
             origin + " line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
      kv.items_[key] = value;
    }
    return kv;
  }

  bool has(const std::string& key) const { return items_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& dflt) {
    touch(key);
    auto it = items_.find(key);
    return it == items_.end() ? dflt : it->second;
  }

  int64_t get_int(const std::string& key, int64_t dflt) {
    touch(key);
    auto it = items_.find(key);
    if (it == items_.end()) return dflt;
    int64_t out = 0;
    auto [p, ec] = std::from_chars(it->second.data(),
                                   it->second.data() + it->second.size(), out);
    if (ec != std::errc() || p != it->second.data() + it->second.size())
      fail(ErrorCode::ConfigParse, "config",
           "key '" + key + "': not an integer: '" + it->second + "'");
    return out;
  }

  double get_double(const std::string& key, double dflt) {
    touch(key);
    auto it = items_.find(key);
    if (it == items_.end()) return dflt;
    try {
      size_t pos = 0;
      double out = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return out;
    } catch (const std::exception&) {
      fail(ErrorCode::ConfigParse, "config",
           "key '" + key + "': not a number: '" + it->second + "'");
    }
  }

  bool get_bool(const std::string& key, bool dflt) {
    touch(key);
    auto it = items_.find(key);
    if (it == items_.end()) return dflt;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    fail(ErrorCode::ConfigParse, "config",
         "key '" + key + "': expected true/false: '" + it->second + "'");
  }

  // comma-separated list, e.g. "10,8,4"
  std::vector<int> get_int_list(const std::string& key,
                                const std::vector<int>& dflt) {
    touch(key);
    auto it = items_.find(key);
    if (it == items_.end()) return dflt;
    std::vector<int> out;
    std::istringstream is(it->second);
    std::string tok;
    while (std::getline(is, tok, ',')) {
      tok = strip(tok);
      if (tok.empty())
        fail(ErrorCode::ConfigParse, "config", "key '" + key + "': empty list item");
      out.push_back(std::stoi(tok));
    }
    return out;
  }

  // Call after all known keys have been read.
  void reject_unknown(const std::string& origin = "") const {
    for (const auto& [k, v] : items_) {
      if (!touched_.count(k))
        fail(ErrorCode::ConfigParse, "config",
             origin + ": unknown key '" + k + "'");
    }
  }

  void set(const std::string& key, const std::string& value) { items_[key] = value; }
  void set_int(const std::string& key, int64_t v) { items_[key] = std::to_string(v); }
  void set_double(const std::string& key, double v) { items_[key] = format_double(v); }
  void set_bool(const std::string& key, bool v) { items_[key] = v ? "true" : "false"; }
  void set_int_list(const std::string& key, const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(v[i]);
    }
    items_[key] = s;
  }

  // Canonical text: sorted keys, one per line. Hash this for provenance.
  std::string canonical_text() const {
    std::string out;
    for (const auto& [k, v] : items_) {  // std::map is already sorted
      out += k;
      out += " = ";
      out += v;
      out += "\n";
    }
    return out;
  }

  std::string content_hash() const { return sha256_hex(canonical_text()); }

  const std::map<std::string, std::string>& items() const { return items_; }

 private:
  static std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  void touch(const std::string& key) { touched_.insert(key); }

  std::map<std::string, std::string> items_;
  mutable std::set<std::string> touched_;
};

}  // namespace hyface
