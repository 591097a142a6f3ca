#pragma once

// Minimal insertion-ordered JSON value with byte-deterministic output:
// doubles rendered with 17 significant digits, keys kept in insertion order,
// non-finite numbers emitted as null.

#include <cstdint>
#include <cstdio>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace betasel {

class jval {
 public:
  jval() : node_(nullptr) {}

  static jval object() {
    jval v;
    v.node_ = obj_t{};
    return v;
  }
  static jval array() {
    jval v;
    v.node_ = arr_t{};
    return v;
  }
  jval(const char* s) : node_(std::string(s)) {}
  jval(std::string s) : node_(std::move(s)) {}
  jval(double d) : node_(d) {}
  jval(int i) : node_(static_cast<std::int64_t>(i)) {}
  jval(std::int64_t i) : node_(i) {}
  jval(std::uint64_t i) : node_(i) {}
  jval(bool b) : node_(b) {}

  jval& set(const std::string& key, jval value) {
    std::get<obj_t>(node_).emplace_back(key, std::move(value));
    return *this;
  }
  jval& push(jval value) {
    std::get<arr_t>(node_).push_back(std::move(value));
    return *this;
  }

  std::string dump() const {
    std::string out;
    write(out);
    return out;
  }

 private:
  using obj_t = std::vector<std::pair<std::string, jval>>;
  using arr_t = std::vector<jval>;
  std::variant<std::nullptr_t, bool, std::int64_t, std::uint64_t, double, std::string,
               arr_t, obj_t>
      node_;

  static void write_escaped(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out += buf;
          } else {
            out += c;
          }
      }
    }
    out += '"';
  }

  void write(std::string& out) const {
    switch (node_.index()) {
      case 0: out += "null"; break;
      case 1: out += std::get<bool>(node_) ? "true" : "false"; break;
      case 2: out += std::to_string(std::get<std::int64_t>(node_)); break;
      case 3: out += std::to_string(std::get<std::uint64_t>(node_)); break;
      case 4: {
        const double d = std::get<double>(node_);
        if (!std::isfinite(d)) {
          out += "null";
        } else {
          char buf[40];
          std::snprintf(buf, sizeof(buf), "%.17g", d);
          out += buf;
        }
        break;
      }
      case 5: write_escaped(out, std::get<std::string>(node_)); break;
      case 6: {
        out += '[';
        const auto& arr = std::get<arr_t>(node_);
        for (std::size_t i = 0; i < arr.size(); ++i) {
          if (i) out += ',';
          arr[i].write(out);
        }
        out += ']';
        break;
      }
      case 7: {
        out += '{';
        const auto& obj = std::get<obj_t>(node_);
        for (std::size_t i = 0; i < obj.size(); ++i) {
          if (i) out += ',';
          write_escaped(out, obj[i].first);
          out += ':';
          obj[i].second.write(out);
        }
        out += '}';
        break;
      }
    }
  }
};

}  // namespace betasel
