#include "altgr/session.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "altgr/frontend.h"

namespace altgr {

using Json = nlohmann::json;

Action Action::add_instance(NodeId id, std::string name, std::vector<std::string> vars,
                            std::vector<std::string> terms) {
  Action a = make(Kind::AddInstance, id, std::move(name));
  a.vars = std::move(vars);
  a.terms = std::move(terms);
  return a;
}

Action Action::add_trigger(NodeId id, bool replace, std::string text) {
  Action a = make(Kind::AddTrigger, id);
  a.replace = replace;
  a.text = std::move(text);
  return a;
}

Action Action::limit_lemma(NodeId id, std::string name, long n) {
  Action a = make(Kind::LimitLemma, id, std::move(name));
  a.limit = n;
  return a;
}

Action Action::unlimit_lemma(NodeId id, std::string name) {
  return make(Kind::UnlimitLemma, id, std::move(name));
}

const char* action_kind_name(Action::Kind k) {
  switch (k) {
    case Action::Kind::Prune: return "Prune";
    case Action::Kind::IncorrectPrune: return "IncorrectPrune";
    case Action::Kind::Unprune: return "Unprune";
    case Action::Kind::AddInstance: return "AddInstance";
    case Action::Kind::AddTrigger: return "AddTrigger";
    case Action::Kind::LimitLemma: return "LimitLemma";
    case Action::Kind::UnlimitLemma: return "UnlimitLemma";
  }
  return "?";
}

std::string action_str(const Action& a) {
  std::string s = std::string(action_kind_name(a.kind)) + " " + std::to_string(a.id);
  switch (a.kind) {
    case Action::Kind::AddInstance:
      s += " " + Json(a.name).dump() + " " + Json(a.vars).dump() + " " + Json(a.terms).dump();
      break;
    case Action::Kind::AddTrigger:
      s += std::string(a.replace ? " true " : " false ") + Json(a.text).dump();
      break;
    case Action::Kind::LimitLemma:
      s += " " + Json(a.name).dump() + " " + std::to_string(a.limit);
      break;
    case Action::Kind::UnlimitLemma: s += " " + Json(a.name).dump(); break;
    default: break;
  }
  return s;
}

bool Document::has_incorrect_prune() const {
  return std::any_of(actions.begin(), actions.end(),
                     [](const Action& a) { return a.kind == Action::Kind::IncorrectPrune; });
}

Document open_document(std::string_view text) {
  Document d;
  d.ast = frontend::load_problem(text);
  return d;
}

/*------------------------------------------------------------------------*/

namespace {

NodeId quantifier_head(const AnnotatedAst& ast, NodeId id) {
  try {
    return lemma_head(ast, id);
  } catch (const AstError& e) {
    throw ActionError(e.what());
  }
}

ActionOutcome apply_unchecked(Document& doc, const Action& a) {
  AnnotatedAst& ast = doc.ast;
  if (!ast.valid(a.id)) throw ActionError("no node " + std::to_string(a.id));
  ActionOutcome out{a, {}};
  switch (a.kind) {
    case Action::Kind::Prune:
    case Action::Kind::IncorrectPrune: {
      if (ast.node(a.id).prune != PruneState::Active)
        throw ActionError("node " + std::to_string(a.id) + " is already pruned");
      PruneReport r = toggle_prune(ast, a.id);
      out.recorded.kind = r.soundness == Soundness::Sound ? Action::Kind::Prune
                                                          : Action::Kind::IncorrectPrune;
      out.changed = r.closure;
      break;
    }
    case Action::Kind::Unprune: {
      if (ast.node(a.id).prune == PruneState::Active)
        throw ActionError("node " + std::to_string(a.id) + " is not pruned");
      out.changed = toggle_prune(ast, a.id).closure;
      break;
    }
    case Action::Kind::AddInstance: {
      if (a.vars.size() != a.terms.size())
        throw ActionError("each instance term needs a variable");
      std::vector<std::pair<std::string, std::string>> bindings;
      for (size_t i = 0; i < a.vars.size(); ++i) bindings.emplace_back(a.vars[i], a.terms[i]);
      NodeId before = static_cast<NodeId>(ast.size());
      NodeId id = manual_instance(ast, a.id, bindings, a.name);
      for (NodeId n = before; n < static_cast<NodeId>(ast.size()); ++n) out.changed.push_back(n);
      (void)id;
      break;
    }
    case Action::Kind::AddTrigger: {
      NodeId head = quantifier_head(ast, a.id);
      frontend::FragmentScope scope{&ast.env, ast.block_vars(head), ast.required_type_vars(head)};
      std::vector<Trigger> trigs = frontend::parse_trigger_fragment(a.text, scope);
      auto& list = ast.triggers[head];
      if (a.replace) list.clear();
      list.insert(list.end(), trigs.begin(), trigs.end());
      ast.warnings.erase(head);
      out.changed = {head};
      break;
    }
    case Action::Kind::LimitLemma: {
      NodeId head = quantifier_head(ast, a.id);
      if (a.limit <= 0) throw ActionError(NonPositiveLimit().what());
      doc.budgets.declare(head, ast.lemma_display_name(head));
      doc.budgets.set_limit(head, a.limit);
      out.changed = {head};
      break;
    }
    case Action::Kind::UnlimitLemma: {
      NodeId head = quantifier_head(ast, a.id);
      doc.budgets.unset_limit(head);
      out.changed = {head};
      break;
    }
  }
  return out;
}

}  // namespace

namespace {

ActionOutcome apply_wrapped(Document& doc, const Action& a) {
  try {
    return apply_unchecked(doc, a);
  } catch (const ActionError&) {
    throw;
  } catch (const std::exception& e) {
    throw ActionError(e.what());
  }
}

}  // namespace

ActionOutcome apply_action(Document& doc, const Action& a) {
  if (a.kind == Action::Kind::LimitLemma || a.kind == Action::Kind::UnlimitLemma) {
    // A running solver may hold the budget table.  These fail before they
    // change anything, so they can go in place.
    ActionOutcome out = apply_wrapped(doc, a);
    doc.actions.push_back(out.recorded);
    return out;
  }
  // Manual instances and trigger edits touch several fields; work on a copy
  // so that a failure leaves nothing behind.
  Document scratch = doc;
  ActionOutcome out = apply_wrapped(scratch, a);
  scratch.actions.push_back(out.recorded);
  doc = std::move(scratch);
  return out;
}

std::vector<ActionOutcome> prune_with_dependents(Document& doc, NodeId decl) {
  if (!doc.ast.valid(decl) || !doc.ast.node(decl).is_decl)
    throw ActionError("node " + std::to_string(decl) + " is not a declaration");
  Document scratch = doc;
  std::vector<ActionOutcome> out;
  for (NodeId d : dependency_closure(scratch.ast, decl)) {
    const AnnNode& n = scratch.ast.node(d);
    if (n.decl_kind == DeclKind::Goal || n.prune != PruneState::Active) continue;
    out.push_back(apply_action(scratch, Action::prune(d)));
  }
  doc = std::move(scratch);
  return out;
}

/*------------------------------------------------------------------------*/

Session make_session(const Document& doc) {
  if (doc.has_incorrect_prune()) throw SaveRefused();
  Session s;
  for (const auto& d : doc.ast.decls) s.names.emplace_back(d.name(), d.id);
  s.actions = doc.actions;
  return s;
}

std::string write_session(const Session& s) {
  std::ostringstream out;
  out << "ALTGR-SESSION v" << s.version << "\n";
  for (const auto& [name, id] : s.names) out << "NAME " << name << " " << id << "\n";
  for (const auto& a : s.actions) out << "ACTION " << action_str(a) << "\n";
  return out.str();
}

namespace {

// Whitespace separated fields; JSON strings and arrays stay whole.
std::vector<std::string> fields(std::string_view line) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ') {
      ++i;
      continue;
    }
    size_t start = i;
    int depth = 0;
    bool in_string = false;
    for (; i < line.size(); ++i) {
      char c = line[i];
      if (in_string) {
        if (c == '\\')
          ++i;
        else if (c == '"')
          in_string = false;
        continue;
      }
      if (c == '"')
        in_string = true;
      else if (c == '[')
        ++depth;
      else if (c == ']')
        --depth;
      else if (c == ' ' && depth == 0)
        break;
    }
    out.emplace_back(line.substr(start, i - start));
  }
  return out;
}

Action parse_action(const std::vector<std::string>& f, int lineno) {
  auto fail = [&](const std::string& why) {
    return SessionFormatError("line " + std::to_string(lineno) + ": " + why);
  };
  if (f.size() < 3) throw fail("truncated action");
  static const std::vector<std::pair<std::string, Action::Kind>> kinds = {
      {"Prune", Action::Kind::Prune},           {"IncorrectPrune", Action::Kind::IncorrectPrune},
      {"Unprune", Action::Kind::Unprune},       {"AddInstance", Action::Kind::AddInstance},
      {"AddTrigger", Action::Kind::AddTrigger}, {"LimitLemma", Action::Kind::LimitLemma},
      {"UnlimitLemma", Action::Kind::UnlimitLemma}};
  auto k = std::find_if(kinds.begin(), kinds.end(), [&](const auto& p) { return p.first == f[1]; });
  if (k == kinds.end()) throw fail("unknown action " + f[1]);
  size_t want = 3;
  switch (k->second) {
    case Action::Kind::AddInstance: want = 6; break;
    case Action::Kind::AddTrigger:
    case Action::Kind::LimitLemma: want = 5; break;
    case Action::Kind::UnlimitLemma: want = 4; break;
    default: break;
  }
  if (f.size() != want) throw fail("wrong number of fields for " + f[1]);
  try {
    Action a;
    a.kind = k->second;
    a.id = Json::parse(f[2]).get<NodeId>();
    switch (a.kind) {
      case Action::Kind::AddInstance:
        a.name = Json::parse(f[3]).get<std::string>();
        a.vars = Json::parse(f[4]).get<std::vector<std::string>>();
        a.terms = Json::parse(f[5]).get<std::vector<std::string>>();
        break;
      case Action::Kind::AddTrigger:
        a.replace = Json::parse(f[3]).get<bool>();
        a.text = Json::parse(f[4]).get<std::string>();
        break;
      case Action::Kind::LimitLemma:
        a.name = Json::parse(f[3]).get<std::string>();
        a.limit = Json::parse(f[4]).get<long>();
        break;
      case Action::Kind::UnlimitLemma: a.name = Json::parse(f[3]).get<std::string>(); break;
      default: break;
    }
    return a;
  } catch (const Json::exception& e) {
    throw fail(e.what());
  }
}

}  // namespace

Session read_session(std::string_view text) {
  Session s;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line.rfind("ALTGR-SESSION v", 0) != 0) throw SessionFormatError("not a session file");
      try {
        s.version = std::stoi(line.substr(15));
      } catch (const std::exception&) {
        throw SessionFormatError("bad version");
      }
      if (s.version != 1)
        throw SessionFormatError("unsupported session version " + std::to_string(s.version));
      header = true;
      continue;
    }
    auto f = fields(line);
    if (f[0] == "NAME") {
      if (f.size() != 3) throw SessionFormatError("line " + std::to_string(lineno) + ": bad NAME");
      try {
        s.names.emplace_back(f[1], std::stoi(f[2]));
      } catch (const std::exception&) {
        throw SessionFormatError("line " + std::to_string(lineno) + ": bad id");
      }
    } else if (f[0] == "ACTION") {
      s.actions.push_back(parse_action(f, lineno));
    } else {
      throw SessionFormatError("line " + std::to_string(lineno) + ": unknown record " + f[0]);
    }
  }
  if (!header) throw SessionFormatError("empty session file");
  return s;
}

void save_session(const Document& doc, const std::string& path) {
  Session s = make_session(doc);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << write_session(s);
  if (!out) throw std::runtime_error("cannot write " + path);
}

Session load_session_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return read_session(ss.str());
}

/*------------------------------------------------------------------------*/

namespace {

bool kind_fits(const AnnotatedAst& ast, const Action& a) {
  const AnnNode& n = ast.node(a.id);
  switch (a.kind) {
    case Action::Kind::Prune:
    case Action::Kind::IncorrectPrune:
    case Action::Kind::Unprune: return n.prunable;
    default:
      return n.is_decl ? n.decl_kind == DeclKind::Axiom || n.decl_kind == DeclKind::Goal
                       : is_quantifier(n.op);
  }
}

}  // namespace

ReplayReport replay(const Session& s, Document& doc, double threshold) {
  Document work = doc;
  ReplayReport report;
  std::vector<std::pair<NodeId, std::string>> by_id;
  for (const auto& [name, id] : s.names) by_id.emplace_back(id, name);
  std::sort(by_id.begin(), by_id.end());

  for (const auto& saved : s.actions) {
    auto it = std::upper_bound(by_id.begin(), by_id.end(), std::make_pair(saved.id, std::string()),
                               [](const auto& a, const auto& b) { return a.first < b.first; });
    if (it == by_id.begin()) {
      report.failed.emplace_back(saved, "no declaration covers id " + std::to_string(saved.id));
      continue;
    }
    --it;
    auto now = work.ast.find_decl(it->second);
    if (!now) {
      report.failed.emplace_back(saved, "declaration " + it->second + " is gone");
      continue;
    }
    Action a = saved;
    a.id = saved.id + (*now - it->first);
    if (!work.ast.valid(a.id) || work.ast.node(a.id).decl != *now || !kind_fits(work.ast, a)) {
      report.failed.emplace_back(saved, "node " + std::to_string(a.id) + " does not fit " +
                                            action_kind_name(a.kind));
      continue;
    }
    try {
      apply_action(work, a);
      ++report.applied;
    } catch (const ActionError& e) {
      report.failed.emplace_back(saved, e.what());
    }
  }
  size_t total = s.actions.size();
  if (total > 0 && static_cast<double>(report.failed.size()) / total > threshold) {
    report.aborted = true;
    return report;
  }
  doc = std::move(work);
  return report;
}

}  // namespace altgr
