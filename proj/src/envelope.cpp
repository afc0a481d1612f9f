#include "guardrail/envelope.hpp"

#include <sstream>

namespace guardrail {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string strip(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Body lines between a "HEADER:" line and "END". Throws when either marker is
// missing — malformed envelopes must never be silently repaired.
std::vector<std::string> body_lines(std::string_view text, const std::string& header,
                                    bool keep_blank = false) {
  std::vector<std::string> all = lines_of(text);
  std::vector<std::string> out;
  bool in_body = false, saw_header = false, saw_end = false;
  for (const std::string& raw : all) {
    std::string line = strip(raw);
    if (!in_body) {
      if (line == header) {
        in_body = true;
        saw_header = true;
      }
      continue;
    }
    if (line == "END") {
      saw_end = true;
      break;
    }
    if (!line.empty() || keep_blank) out.push_back(line);
  }
  if (!saw_header) throw EnvelopeError("envelope missing '" + header + "' section");
  if (!saw_end) throw EnvelopeError("envelope missing END marker");
  return out;
}

std::string state_value_text(const StateValue& v) {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
  return format_number(std::get<double>(v));
}

StateValue state_value_from_text(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw EnvelopeError("bad state value '" + s + "'");
}

}  // namespace

ActionProposal parse_action_text(std::string_view text) {
  std::string s = strip(text);
  ActionProposal a;
  auto open = s.find('(');
  if (open == std::string::npos) {
    a.name = s;
    return a;
  }
  if (s.back() != ')') throw EnvelopeError("malformed action text '" + s + "'");
  a.name = strip(s.substr(0, open));
  std::string inner = s.substr(open + 1, s.size() - open - 2);
  if (!inner.empty()) {
    auto parts = split(inner, ',');
    if (parts.size() > 2) throw EnvelopeError("malformed action text '" + s + "'");
    a.target = strip(parts[0]);
    if (parts.size() == 2) a.argument = strip(parts[1]);
  }
  if (a.name.empty()) throw EnvelopeError("malformed action text '" + s + "'");
  return a;
}

std::string render_objects_envelope(const std::vector<SceneObject>& objects) {
  std::ostringstream out;
  out << "OBJECTS:\n";
  for (const auto& obj : objects) {
    out << "name=" << obj.name << " id=" << obj.instance_id;
    if (!obj.states.empty()) {
      out << " states=";
      bool first = true;
      for (const auto& [k, v] : obj.states) {
        if (!first) out << ";";
        out << k << "=" << state_value_text(v);
        first = false;
      }
    }
    if (!obj.materials.empty()) {
      out << " materials=";
      bool first = true;
      for (const auto& [k, v] : obj.materials) {
        if (!first) out << ";";
        out << k << "=" << (v ? "true" : "false");
        first = false;
      }
    }
    if (!obj.contains.empty()) {
      out << " contains=";
      for (size_t i = 0; i < obj.contains.size(); ++i) {
        if (i > 0) out << ",";
        out << obj.contains[i];
      }
    }
    out << "\n";
  }
  out << "END\n";
  return out.str();
}

std::vector<SceneObject> parse_objects_envelope(std::string_view text) {
  std::vector<SceneObject> out;
  for (const std::string& line : body_lines(text, "OBJECTS:")) {
    SceneObject obj;
    for (const std::string& field : split(line, ' ')) {
      if (field.empty()) continue;
      auto eq = field.find('=');
      if (eq == std::string::npos) throw EnvelopeError("bad object field '" + field + "'");
      std::string key = field.substr(0, eq);
      std::string value = field.substr(eq + 1);
      if (key == "name") {
        obj.name = value;
      } else if (key == "id") {
        obj.instance_id = value;
      } else if (key == "states") {
        for (const std::string& kv : split(value, ';')) {
          auto e2 = kv.find('=');
          if (e2 == std::string::npos) throw EnvelopeError("bad state '" + kv + "'");
          obj.states[kv.substr(0, e2)] = state_value_from_text(kv.substr(e2 + 1));
        }
      } else if (key == "materials") {
        for (const std::string& kv : split(value, ';')) {
          auto e2 = kv.find('=');
          if (e2 == std::string::npos) throw EnvelopeError("bad material '" + kv + "'");
          obj.materials[kv.substr(0, e2)] = kv.substr(e2 + 1) == "true";
        }
      } else if (key == "contains") {
        obj.contains = split(value, ',');
      } else {
        throw EnvelopeError("unknown object field '" + key + "'");
      }
    }
    if (obj.name.empty() || obj.instance_id.empty()) {
      throw EnvelopeError("object record needs name= and id=: '" + line + "'");
    }
    out.push_back(std::move(obj));
  }
  return out;
}

std::string render_contextual_envelope(const std::string& reasoning,
                                       const std::vector<std::string>& predicates) {
  std::ostringstream out;
  out << "REASONING:\n";
  if (!reasoning.empty()) out << reasoning << "\n";
  out << "PREDICATES:\n";
  for (const auto& p : predicates) out << p << "\n";
  out << "END\n";
  return out.str();
}

ContextualParts parse_contextual_envelope(std::string_view text) {
  std::vector<std::string> all = lines_of(text);
  ContextualParts parts;
  enum { before, reasoning, predicates, after } state = before;
  bool saw_end = false;
  std::vector<std::string> reasoning_lines;
  for (const std::string& raw : all) {
    std::string line = strip(raw);
    if (state == before) {
      if (line == "REASONING:") state = reasoning;
      continue;
    }
    if (state == reasoning) {
      if (line == "PREDICATES:") {
        state = predicates;
        continue;
      }
      if (line == "END") throw EnvelopeError("envelope missing PREDICATES section");
      if (!line.empty()) reasoning_lines.push_back(line);
      continue;
    }
    if (state == predicates) {
      if (line == "END") {
        saw_end = true;
        state = after;
        continue;
      }
      if (!line.empty()) parts.predicate_sources.push_back(line);
    }
  }
  if (state == before) throw EnvelopeError("envelope missing REASONING section");
  if (!saw_end) throw EnvelopeError("envelope missing END marker");
  for (size_t i = 0; i < reasoning_lines.size(); ++i) {
    if (i > 0) parts.reasoning += "\n";
    parts.reasoning += reasoning_lines[i];
  }
  return parts;
}

std::string render_temporal_envelope(const std::vector<TemporalRecord>& records) {
  std::ostringstream out;
  out << "TEMPORAL:\n";
  for (const auto& r : records) {
    out << "kind=" << r.kind << " trigger=" << r.trigger_name << "(" << r.trigger_target << ")"
        << " response=" << r.response_name << "(" << r.response_target << ")"
        << " window=" << r.window << "\n";
  }
  out << "END\n";
  return out.str();
}

std::vector<TemporalRecord> parse_temporal_envelope(std::string_view text) {
  std::vector<TemporalRecord> out;
  for (const std::string& line : body_lines(text, "TEMPORAL:")) {
    TemporalRecord rec;
    bool have_kind = false, have_trigger = false, have_response = false, have_window = false;
    for (const std::string& field : split(line, ' ')) {
      if (field.empty()) continue;
      auto eq = field.find('=');
      if (eq == std::string::npos) throw EnvelopeError("bad temporal field '" + field + "'");
      std::string key = field.substr(0, eq);
      std::string value = field.substr(eq + 1);
      if (key == "kind") {
        rec.kind = value;
        have_kind = true;
      } else if (key == "trigger") {
        ActionProposal a = parse_action_text(value);
        rec.trigger_name = a.name;
        rec.trigger_target = a.target;
        have_trigger = true;
      } else if (key == "response") {
        ActionProposal a = parse_action_text(value);
        rec.response_name = a.name;
        rec.response_target = a.target;
        have_response = true;
      } else if (key == "window") {
        try {
          rec.window = std::stoi(value);
        } catch (const std::exception&) {
          throw EnvelopeError("bad window '" + value + "'");
        }
        have_window = true;
      } else {
        throw EnvelopeError("unknown temporal field '" + key + "'");
      }
    }
    if (!have_kind || !have_trigger || !have_response || !have_window) {
      throw EnvelopeError("temporal record missing required field: '" + line + "'");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::string render_replan_envelope(const std::vector<ActionProposal>& steps) {
  std::ostringstream out;
  out << "STEPS:\n";
  for (const auto& a : steps) out << action_text(a) << "\n";
  out << "END\n";
  return out.str();
}

std::vector<ActionProposal> parse_replan_envelope(std::string_view text) {
  std::vector<ActionProposal> out;
  for (const std::string& line : body_lines(text, "STEPS:")) {
    out.push_back(parse_action_text(line));
  }
  return out;
}

}  // namespace guardrail
