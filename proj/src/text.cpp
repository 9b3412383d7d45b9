// Copyright 2026 The nsplan Authors
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

#include "nsplan/text.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

namespace nsplan::text
{
namespace
{

std::string kind_name(ParseError::Kind k)
{
  switch (k) {
    case ParseError::Kind::syntax:
      return "syntax error";
    case ParseError::Kind::vocabulary:
      return "vocabulary error";
    case ParseError::Kind::duplicate_id:
      return "duplicate id";
    case ParseError::Kind::validation:
      return "validation error";
  }
  return "parse error";
}

std::string make_message(ParseError::Kind k, int line, int col, const std::string & detail)
{
  std::ostringstream os;
  os << kind_name(k) << " at " << line << ":" << col << ": " << detail;
  return os.str();
}

bool is_lower_alpha(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_atom_start(char c) { return is_lower_alpha(c) || c == '_'; }
bool is_atom_char(char c) { return is_atom_start(c) || is_digit(c); }

struct Token
{
  enum class Type { atom, number, lparen, rparen, comma, dot, end };
  Type type{Type::end};
  std::string text;
  double value{0.0};
  int line{1};
  int col{1};
};

class Lexer
{
public:
  explicit Lexer(std::string_view input) : input_(input) {}

  Token next()
  {
    skip_space_and_comments();
    Token tok;
    tok.line = line_;
    tok.col = col_;
    if (pos_ >= input_.size()) {
      tok.type = Token::Type::end;
      return tok;
    }
    const char c = input_[pos_];
    switch (c) {
      case '(':
        advance();
        tok.type = Token::Type::lparen;
        return tok;
      case ')':
        advance();
        tok.type = Token::Type::rparen;
        return tok;
      case ',':
        advance();
        tok.type = Token::Type::comma;
        return tok;
      case '.':
        // A leading '.' is the statement terminator; digits never start with
        // one in this grammar.
        advance();
        tok.type = Token::Type::dot;
        return tok;
      default:
        break;
    }
    if (is_atom_start(c)) {
      const std::size_t begin = pos_;
      while (pos_ < input_.size() && is_atom_char(input_[pos_])) advance();
      tok.type = Token::Type::atom;
      tok.text = std::string(input_.substr(begin, pos_ - begin));
      return tok;
    }
    if (is_digit(c) || c == '-') {
      return lex_number(tok);
    }
    throw ParseError::syntax(line_, col_, "atom, number, or punctuation");
  }

private:
  void advance()
  {
    if (input_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space_and_comments()
  {
    while (pos_ < input_.size()) {
      const char c = input_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '%') {
        while (pos_ < input_.size() && input_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token lex_number(Token & tok)
  {
    const std::size_t begin = pos_;
    if (input_[pos_] == '-') advance();
    if (pos_ >= input_.size() || !is_digit(input_[pos_])) {
      throw ParseError::syntax(tok.line, tok.col, "digit after '-'");
    }
    while (pos_ < input_.size() && is_digit(input_[pos_])) advance();
    // Fraction: '.' is consumed only when followed by a digit, so the
    // statement terminator stays intact ("4.5." is number 4.5 then dot).
    if (pos_ + 1 < input_.size() && input_[pos_] == '.' && is_digit(input_[pos_ + 1])) {
      advance();
      while (pos_ < input_.size() && is_digit(input_[pos_])) advance();
    }
    // Exponent, only when unambiguous.
    if (pos_ < input_.size() && (input_[pos_] == 'e' || input_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < input_.size() && (input_[look] == '+' || input_[look] == '-')) ++look;
      if (look < input_.size() && is_digit(input_[look])) {
        while (pos_ < look) advance();
        while (pos_ < input_.size() && is_digit(input_[pos_])) advance();
      }
    }
    tok.type = Token::Type::number;
    tok.text = std::string(input_.substr(begin, pos_ - begin));
    tok.value = std::strtod(tok.text.c_str(), nullptr);
    if (!std::isfinite(tok.value)) {
      throw ParseError::validation(tok.line, tok.col, "number out of range: " + tok.text);
    }
    return tok;
  }

  std::string_view input_;
  std::size_t pos_{0};
  int line_{1};
  int col_{1};
};

struct Statement
{
  std::string name;
  std::vector<Token> args;
  int line{1};
  int col{1};
};

// Reads `name(arg, ...).` statements off the lexer.
class StatementReader
{
public:
  explicit StatementReader(std::string_view input) : lex_(input) { cur_ = lex_.next(); }

  bool at_end() const { return cur_.type == Token::Type::end; }
  int line() const { return cur_.line; }
  int col() const { return cur_.col; }

  Statement read()
  {
    Statement st;
    st.line = cur_.line;
    st.col = cur_.col;
    if (cur_.type != Token::Type::atom) {
      throw ParseError::syntax(cur_.line, cur_.col, "predicate name");
    }
    st.name = cur_.text;
    next();
    expect(Token::Type::lparen, "'('");
    if (cur_.type != Token::Type::rparen) {
      st.args.push_back(read_arg());
      while (cur_.type == Token::Type::comma) {
        next();
        st.args.push_back(read_arg());
      }
    }
    expect(Token::Type::rparen, "')'");
    expect(Token::Type::dot, "'.'");
    return st;
  }

private:
  Token read_arg()
  {
    if (cur_.type != Token::Type::atom && cur_.type != Token::Type::number) {
      throw ParseError::syntax(cur_.line, cur_.col, "argument (atom or number)");
    }
    Token t = cur_;
    next();
    return t;
  }

  void expect(Token::Type type, const std::string & what)
  {
    if (cur_.type != type) {
      throw ParseError::syntax(cur_.line, cur_.col, what);
    }
    next();
  }

  void next() { cur_ = lex_.next(); }

  Lexer lex_;
  Token cur_;
};

double need_number(const Token & t, const std::string & slot)
{
  if (t.type != Token::Type::number) {
    throw ParseError::syntax(t.line, t.col, "number for " + slot);
  }
  return t.value;
}

double need_nonneg(const Token & t, const std::string & slot)
{
  const double v = need_number(t, slot);
  if (v < 0.0) {
    throw ParseError::validation(t.line, t.col, slot + " must be >= 0, got " + t.text);
  }
  return v;
}

std::int64_t need_int(const Token & t, const std::string & slot)
{
  const double v = need_number(t, slot);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) {
    throw ParseError::validation(t.line, t.col, slot + " must be an integer, got " + t.text);
  }
  return static_cast<std::int64_t>(v);
}

const std::string & need_atom(const Token & t, const std::string & slot)
{
  if (t.type != Token::Type::atom) {
    throw ParseError::syntax(t.line, t.col, "atom for " + slot);
  }
  return t.text;
}

template <typename Enum>
Enum need_vocab(
  const Token & t, const std::string & slot, std::optional<Enum> (*lookup)(std::string_view))
{
  const std::string & name = need_atom(t, slot);
  const auto v = lookup(name);
  if (!v) {
    throw ParseError::vocabulary(t.line, t.col, name, slot);
  }
  return *v;
}

void check_arity(const Statement & st, std::size_t n)
{
  if (st.args.size() != n) {
    throw ParseError::syntax(
      st.line, st.col,
      std::to_string(n) + " arguments for " + st.name + ", got " + std::to_string(st.args.size()));
  }
}

ObjectFact parse_object(const Statement & st)
{
  check_arity(st, 8);
  ObjectFact o;
  o.id = need_int(st.args[0], "object id");
  if (o.id < 0) {
    throw ParseError::validation(st.args[0].line, st.args[0].col, "object id must be >= 0");
  }
  o.category = need_vocab<Category>(st.args[1], "category", &category_from_string);
  o.distance = need_nonneg(st.args[2], "distance");
  o.speed = need_nonneg(st.args[3], "speed");
  o.heading = wrap_angle(need_number(st.args[4], "heading"));
  o.relative_pos = need_vocab<RelativePos>(st.args[5], "relative_pos", &relative_pos_from_string);
  o.attribute = need_vocab<Attribute>(st.args[6], "attribute", &attribute_from_string);
  const Token & ttc = st.args[7];
  if (ttc.type == Token::Type::atom) {
    if (ttc.text != "inf") {
      throw ParseError::vocabulary(ttc.line, ttc.col, ttc.text, "ttc");
    }
    o.ttc = std::numeric_limits<double>::infinity();
  } else {
    o.ttc = need_number(ttc, "ttc");
    if (o.ttc <= 0.0) {
      throw ParseError::validation(ttc.line, ttc.col, "ttc must be > 0 or inf");
    }
  }
  return o;
}

Suggestion parse_suggestion_statement(const Statement & st)
{
  if (st.name != "suggestion") {
    throw ParseError::syntax(st.line, st.col, "suggestion predicate, got " + st.name);
  }
  check_arity(st, 3);
  Suggestion s;
  s.action = need_vocab<ActionSymbol>(st.args[0], "action", &action_from_string);
  s.speed = need_vocab<SpeedSymbol>(st.args[1], "speed", &speed_from_string);
  s.type = need_vocab<RuleType>(st.args[2], "type", &rule_type_from_string);
  s.provenance = "line" + std::to_string(st.line);
  return s;
}

bool valid_atom_token(const std::string & s)
{
  if (s.empty() || !is_atom_start(s[0])) return false;
  for (char c : s) {
    if (!is_atom_char(c)) return false;
  }
  return true;
}

void require_finite(double v, const char * what)
{
  if (!std::isfinite(v)) {
    throw Error(std::string("serialize: non-finite ") + what);
  }
}

}  // namespace

ParseError::ParseError(Kind k, int line_in, int col_in, std::string detail)
: Error(make_message(k, line_in, col_in, detail)), kind(k), line(line_in), col(col_in)
{
}

ParseError ParseError::syntax(int line, int col, std::string expected)
{
  ParseError e(Kind::syntax, line, col, "expected " + expected);
  e.expected = std::move(expected);
  return e;
}

ParseError ParseError::vocabulary(int line, int col, std::string atom, std::string slot)
{
  ParseError e(Kind::vocabulary, line, col, "'" + atom + "' is not a valid " + slot);
  e.atom = std::move(atom);
  e.slot = std::move(slot);
  return e;
}

ParseError ParseError::duplicate_id(int line, int col, std::int64_t id)
{
  ParseError e(Kind::duplicate_id, line, col, "object id " + std::to_string(id) + " repeated");
  e.id = id;
  return e;
}

ParseError ParseError::validation(int line, int col, std::string message)
{
  return ParseError(Kind::validation, line, col, std::move(message));
}

ParsedFacts parse_facts(std::string_view input, std::size_t max_history)
{
  ParsedFacts out;
  StatementReader reader(input);
  bool have_ego = false;
  bool have_frame = false;
  bool have_lane = false;
  bool have_history = false;
  std::set<std::int64_t> ids;
  int last_line = 1;
  int last_col = 1;
  while (!reader.at_end()) {
    last_line = reader.line();
    last_col = reader.col();
    const Statement st = reader.read();
    if (st.name == "ego") {
      if (have_ego) {
        throw ParseError::validation(st.line, st.col, "duplicate ego predicate");
      }
      have_ego = true;
      check_arity(st, 3);
      out.facts.ego.speed = need_nonneg(st.args[0], "ego speed");
      out.facts.ego.heading = wrap_angle(need_number(st.args[1], "ego heading"));
      out.facts.ego.nav = need_vocab<NavCommand>(st.args[2], "nav", &nav_from_string);
    } else if (st.name == "ego_lane") {
      if (have_lane) {
        throw ParseError::validation(st.line, st.col, "duplicate ego_lane predicate");
      }
      have_lane = true;
      check_arity(st, 1);
      out.facts.ego.lane_id = need_int(st.args[0], "lane id");
    } else if (st.name == "ego_history") {
      if (have_history) {
        throw ParseError::validation(st.line, st.col, "duplicate ego_history predicate");
      }
      have_history = true;
      if (st.args.empty()) {
        throw ParseError::syntax(st.line, st.col, "at least one speed in ego_history");
      }
      if (st.args.size() > max_history) {
        throw ParseError::validation(
          st.line, st.col,
          "ego_history holds " + std::to_string(st.args.size()) + " speeds, window is " +
            std::to_string(max_history));
      }
      for (const Token & t : st.args) {
        out.facts.ego.history_speeds.push_back(need_nonneg(t, "history speed"));
      }
    } else if (st.name == "frame") {
      if (have_frame) {
        throw ParseError::validation(st.line, st.col, "duplicate frame predicate");
      }
      have_frame = true;
      check_arity(st, 1);
      out.facts.frame_id = need_atom(st.args[0], "frame id");
    } else if (st.name == "object") {
      ObjectFact o = parse_object(st);
      if (!ids.insert(o.id).second) {
        throw ParseError::duplicate_id(st.line, st.col, o.id);
      }
      out.facts.objects.push_back(std::move(o));
    } else {
      out.unknown.push_back({st.name, st.line});
    }
  }
  if (!have_ego) {
    throw ParseError::validation(last_line, last_col, "missing ego predicate");
  }
  return out;
}

std::vector<Suggestion> parse_suggestions(std::string_view input)
{
  std::vector<Suggestion> out;
  StatementReader reader(input);
  while (!reader.at_end()) {
    out.push_back(parse_suggestion_statement(reader.read()));
  }
  return out;
}

LenientSuggestions parse_suggestions_lenient(
  std::string_view input, std::string_view provenance_prefix)
{
  LenientSuggestions out;
  StatementReader reader(input);
  while (!reader.at_end()) {
    try {
      Statement st = reader.read();
      try {
        Suggestion s = parse_suggestion_statement(st);
        s.provenance = std::string(provenance_prefix) + ":" + s.provenance;
        out.accepted.push_back(std::move(s));
      } catch (const ParseError & e) {
        out.rejected.push_back(e.what());
      }
    } catch (const ParseError & e) {
      // Statement structure itself is broken; cannot resynchronize safely.
      out.rejected.push_back(std::string(e.what()) + " (rest of response dropped)");
      break;
    }
  }
  return out;
}

std::string format_number(double v)
{
  if (std::isnan(v)) {
    throw Error("serialize: NaN has no text form");
  }
  if (std::isinf(v)) {
    if (v < 0) throw Error("serialize: -inf has no text form");
    return "inf";
  }
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double quantize(double v)
{
  if (!std::isfinite(v)) return v;
  return std::strtod(format_number(v).c_str(), nullptr);
}

std::string serialize_facts(const SceneFacts & facts)
{
  std::ostringstream os;
  if (!facts.frame_id.empty()) {
    if (!valid_atom_token(facts.frame_id)) {
      throw Error("serialize: frame id '" + facts.frame_id + "' is not a valid atom");
    }
    os << "frame(" << facts.frame_id << ").\n";
  }
  require_finite(facts.ego.speed, "ego speed");
  require_finite(facts.ego.heading, "ego heading");
  os << "ego(" << format_number(facts.ego.speed) << ", " << format_number(facts.ego.heading)
     << ", " << to_string(facts.ego.nav) << ").\n";
  if (facts.ego.lane_id != 0) {
    os << "ego_lane(" << facts.ego.lane_id << ").\n";
  }
  if (!facts.ego.history_speeds.empty()) {
    os << "ego_history(";
    for (std::size_t i = 0; i < facts.ego.history_speeds.size(); ++i) {
      require_finite(facts.ego.history_speeds[i], "history speed");
      if (i) os << ", ";
      os << format_number(facts.ego.history_speeds[i]);
    }
    os << ").\n";
  }
  for (const ObjectFact & o : facts.objects) {
    require_finite(o.distance, "object distance");
    require_finite(o.speed, "object speed");
    require_finite(o.heading, "object heading");
    os << "object(" << o.id << ", " << to_string(o.category) << ", " << format_number(o.distance)
       << ", " << format_number(o.speed) << ", " << format_number(o.heading) << ", "
       << to_string(o.relative_pos) << ", " << to_string(o.attribute) << ", "
       << format_number(o.ttc) << ").\n";
  }
  return os.str();
}

std::string serialize_suggestion(const Suggestion & s)
{
  std::ostringstream os;
  os << "suggestion(" << to_string(s.action) << ", " << to_string(s.speed) << ", "
     << to_string(s.type) << ").";
  return os.str();
}

std::string serialize_suggestions(const std::vector<Suggestion> & list)
{
  std::string out;
  for (const Suggestion & s : list) {
    out += serialize_suggestion(s);
    out += '\n';
  }
  return out;
}

}  // namespace nsplan::text
