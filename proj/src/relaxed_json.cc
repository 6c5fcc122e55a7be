// Copyright 2026 The MICA Simulator Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mica/relaxed_json.h"

#include <cctype>
#include <limits>

namespace mica::json {

const Value* Value::Find(std::string_view key) const {
  for (const auto& [k, v] : members) {
    if (k == key) return &v;
  }
  return nullptr;
}

Value Value::Int(int64_t v) {
  Value out;
  out.kind = Kind::kInt;
  out.integer = v;
  return out;
}

Value Value::String(std::string s) {
  Value out;
  out.kind = Kind::kString;
  out.str = std::move(s);
  return out;
}

Value Value::Bool(bool b) {
  Value out;
  out.kind = Kind::kBool;
  out.boolean = b;
  return out;
}

Value Value::Object() {
  Value out;
  out.kind = Kind::kObject;
  return out;
}

Value Value::Array() {
  Value out;
  out.kind = Kind::kArray;
  return out;
}

Value& Value::Add(std::string key, Value v) {
  members.emplace_back(std::move(key), std::move(v));
  return members.back().second;
}

Value& Value::Push(Value v) {
  items.push_back(std::move(v));
  return items.back();
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  StatusOr<Value> ParseDocument() {
    Value v;
    MICA_RETURN_IF_ERROR(ParseValue(&v, 0));
    SkipSpace();
    if (pos_ != text_.size()) return Fail("trailing content after document");
    return v;
  }

 private:
  static constexpr int kMaxDepth = 64;

  Status Fail(std::string_view what) const {
    return Error(ErrorCode::kSyntaxError,
                 "line " + std::to_string(line_) + ": " + std::string(what));
  }

  void SkipSpace() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool Peek(char c) {
    SkipSpace();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  Status ParseValue(Value* out, int depth) {
    if (depth > kMaxDepth) return Fail("nesting too deep");
    SkipSpace();
    if (pos_ >= text_.size()) return Fail("unexpected end of input");
    out->line = line_;
    char c = text_[pos_];
    if (c == '{') return ParseObject(out, depth);
    if (c == '[') return ParseArray(out, depth);
    if (c == '"') {
      out->kind = Value::Kind::kString;
      return ParseString(&out->str);
    }
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
      return ParseNumber(out);
    }
    if (ConsumeWord("true")) {
      *out = Value::Bool(true);
      return Status::Ok();
    }
    if (ConsumeWord("false")) {
      *out = Value::Bool(false);
      return Status::Ok();
    }
    if (ConsumeWord("null")) {
      out->kind = Value::Kind::kNull;
      return Status::Ok();
    }
    return Fail(std::string("unexpected character '") + c + "'");
  }

  bool ConsumeWord(std::string_view word) {
    if (text_.substr(pos_, word.size()) != word) return false;
    size_t end = pos_ + word.size();
    if (end < text_.size() &&
        (std::isalnum(static_cast<unsigned char>(text_[end])) ||
         text_[end] == '_')) {
      return false;
    }
    pos_ = end;
    return true;
  }

  Status ParseObject(Value* out, int depth) {
    int line = line_;
    ++pos_;  // '{'
    *out = Value::Object();
    out->line = line;
    while (true) {
      if (Peek('}')) {
        ++pos_;
        return Status::Ok();
      }
      if (pos_ >= text_.size()) return Fail("unterminated object");
      if (text_[pos_] != '"') return Fail("expected string key");
      std::string key;
      MICA_RETURN_IF_ERROR(ParseString(&key));
      if (!Peek(':')) return Fail("expected ':' after key \"" + key + "\"");
      ++pos_;
      Value v;
      MICA_RETURN_IF_ERROR(ParseValue(&v, depth + 1));
      out->members.emplace_back(std::move(key), std::move(v));
      if (Peek(',')) ++pos_;
    }
  }

  Status ParseArray(Value* out, int depth) {
    int line = line_;
    ++pos_;  // '['
    *out = Value::Array();
    out->line = line;
    while (true) {
      if (Peek(']')) {
        ++pos_;
        return Status::Ok();
      }
      if (pos_ >= text_.size()) return Fail("unterminated array");
      Value v;
      MICA_RETURN_IF_ERROR(ParseValue(&v, depth + 1));
      out->items.push_back(std::move(v));
      if (Peek(',')) ++pos_;
    }
  }

  Status ParseString(std::string* out) {
    ++pos_;  // opening quote
    out->clear();
    while (pos_ < text_.size()) {
      char c = text_[pos_++];
      if (c == '"') return Status::Ok();
      if (c == '\n') return Fail("newline in string");
      if (c != '\\') {
        *out += c;
        continue;
      }
      if (pos_ >= text_.size()) break;
      char e = text_[pos_++];
      switch (e) {
        case '"': *out += '"'; break;
        case '\\': *out += '\\'; break;
        case '/': *out += '/'; break;
        case 'b': *out += '\b'; break;
        case 'f': *out += '\f'; break;
        case 'n': *out += '\n'; break;
        case 'r': *out += '\r'; break;
        case 't': *out += '\t'; break;
        case 'u': {
          if (pos_ + 4 > text_.size()) return Fail("short \\u escape");
          unsigned cp = 0;
          for (int i = 0; i < 4; ++i) {
            char h = text_[pos_++];
            cp <<= 4;
            if (h >= '0' && h <= '9') cp |= h - '0';
            else if (h >= 'a' && h <= 'f') cp |= h - 'a' + 10;
            else if (h >= 'A' && h <= 'F') cp |= h - 'A' + 10;
            else return Fail("bad \\u escape");
          }
          if (cp < 0x80) {
            *out += static_cast<char>(cp);
          } else if (cp < 0x800) {
            *out += static_cast<char>(0xc0 | (cp >> 6));
            *out += static_cast<char>(0x80 | (cp & 0x3f));
          } else {
            *out += static_cast<char>(0xe0 | (cp >> 12));
            *out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
            *out += static_cast<char>(0x80 | (cp & 0x3f));
          }
          break;
        }
        default:
          return Fail("bad escape");
      }
    }
    return Fail("unterminated string");
  }

  Status ParseNumber(Value* out) {
    bool negative = false;
    if (text_[pos_] == '-') {
      negative = true;
      ++pos_;
    }
    int base = 10;
    if (pos_ + 1 < text_.size() && text_[pos_] == '0' &&
        (text_[pos_ + 1] == 'x' || text_[pos_ + 1] == 'X')) {
      base = 16;
      pos_ += 2;
    }
    uint64_t magnitude = 0;
    size_t digits = 0;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      int d;
      if (c >= '0' && c <= '9') d = c - '0';
      else if (base == 16 && c >= 'a' && c <= 'f') d = c - 'a' + 10;
      else if (base == 16 && c >= 'A' && c <= 'F') d = c - 'A' + 10;
      else break;
      if (magnitude > (std::numeric_limits<uint64_t>::max() - d) / base) {
        return Fail("integer overflow");
      }
      magnitude = magnitude * base + d;
      ++digits;
      ++pos_;
    }
    if (digits == 0) return Fail("malformed number");
    if (pos_ < text_.size() &&
        (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
      return Fail("non-integer numbers are not supported");
    }
    constexpr uint64_t kMax =
        static_cast<uint64_t>(std::numeric_limits<int64_t>::max());
    if (magnitude > kMax + (negative ? 1 : 0)) return Fail("integer overflow");
    out->kind = Value::Kind::kInt;
    out->integer = negative ? static_cast<int64_t>(0 - magnitude)
                            : static_cast<int64_t>(magnitude);
    return Status::Ok();
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
};

void Escape(const std::string& s, std::string* out) {
  *out += '"';
  for (char c : s) {
    switch (c) {
      case '"': *out += "\\\""; break;
      case '\\': *out += "\\\\"; break;
      case '\n': *out += "\\n"; break;
      case '\t': *out += "\\t"; break;
      case '\r': *out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          static constexpr char kHex[] = "0123456789abcdef";
          *out += "\\u00";
          *out += kHex[(c >> 4) & 0xf];
          *out += kHex[c & 0xf];
        } else {
          *out += c;
        }
    }
  }
  *out += '"';
}

void DumpTo(const Value& v, int indent, int depth, std::string* out) {
  auto newline = [&](int d) {
    if (indent < 0) return;
    *out += '\n';
    out->append(static_cast<size_t>(indent * d), ' ');
  };
  switch (v.kind) {
    case Value::Kind::kNull: *out += "null"; break;
    case Value::Kind::kBool: *out += v.boolean ? "true" : "false"; break;
    case Value::Kind::kInt: *out += std::to_string(v.integer); break;
    case Value::Kind::kString: Escape(v.str, out); break;
    case Value::Kind::kArray:
      *out += '[';
      for (size_t i = 0; i < v.items.size(); ++i) {
        if (i) *out += indent < 0 ? "," : ", ";
        DumpTo(v.items[i], -1, 0, out);
      }
      *out += ']';
      break;
    case Value::Kind::kObject:
      *out += '{';
      for (size_t i = 0; i < v.members.size(); ++i) {
        if (i) *out += ',';
        newline(depth + 1);
        Escape(v.members[i].first, out);
        *out += indent < 0 ? ":" : ": ";
        DumpTo(v.members[i].second, indent, depth + 1, out);
      }
      if (!v.members.empty()) newline(depth);
      *out += '}';
      break;
  }
}

}  // namespace

StatusOr<Value> Parse(std::string_view text) {
  return Parser(text).ParseDocument();
}

std::string Dump(const Value& v) {
  std::string out;
  DumpTo(v, -1, 0, &out);
  return out;
}

std::string DumpPretty(const Value& v) {
  std::string out;
  DumpTo(v, 2, 0, &out);
  return out;
}

}  // namespace mica::json
