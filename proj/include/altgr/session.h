#pragma once

// User actions on a document, the session file that records them, and
// replay of a session against a possibly edited source file.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "altgr/annotated.h"
#include "altgr/matching.h"

namespace altgr {

struct Action {
  enum class Kind {
    Prune,
    IncorrectPrune,
    Unprune,
    AddInstance,
    AddTrigger,
    LimitLemma,
    UnlimitLemma,
  };

  Kind kind = Kind::Prune;
  NodeId id = kNoNode;
  std::string name;                // AddInstance, LimitLemma, UnlimitLemma
  std::vector<std::string> terms;  // AddInstance: term texts ...
  std::vector<std::string> vars;   // ... and the variables they instantiate
  bool replace = false;            // AddTrigger: replace the list or append
  std::string text;                // AddTrigger
  long limit = 0;                  // LimitLemma

  friend bool operator==(const Action&, const Action&) = default;

  static Action prune(NodeId id) { return make(Kind::Prune, id); }
  static Action unprune(NodeId id) { return make(Kind::Unprune, id); }
  static Action add_instance(NodeId id, std::string name, std::vector<std::string> vars,
                             std::vector<std::string> terms);
  static Action add_trigger(NodeId id, bool replace, std::string text);
  static Action limit_lemma(NodeId id, std::string name, long n);
  static Action unlimit_lemma(NodeId id, std::string name);

 private:
  static Action make(Kind k, NodeId id, std::string name = {}) {
    Action a;
    a.kind = k;
    a.id = id;
    a.name = std::move(name);
    return a;
  }
};

const char* action_kind_name(Action::Kind k);
/// `Prune 7`, `AddTrigger 4 false "x, y"`, ... (the session line body).
std::string action_str(const Action& a);

class ActionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A problem being worked on: its annotated tree, instance limits and the
/// actions applied so far.
struct Document {
  AnnotatedAst ast;
  BudgetTable budgets;
  std::vector<Action> actions;

  /// Whether an unsound prune is among the actions.
  bool has_incorrect_prune() const;
};

Document open_document(std::string_view text);

struct ActionOutcome {
  Action recorded;               // as pushed on the stack
  std::vector<NodeId> changed;  // nodes whose state changed
};

/// Applies `a` and pushes it on the document's stack.  A prune classified
/// unsound is recorded as IncorrectPrune.  Failed actions leave the
/// document unchanged and throw ActionError.
ActionOutcome apply_action(Document& doc, const Action& a);

/// Prunes a declaration together with every declaration depending on it
/// (the goal excepted), one Prune action per declaration.
std::vector<ActionOutcome> prune_with_dependents(Document& doc, NodeId decl);

/*------------------------------------------------------------------------*/

struct Session {
  int version = 1;
  std::vector<std::pair<std::string, NodeId>> names;  // first name of each declaration
  std::vector<Action> actions;

  friend bool operator==(const Session&, const Session&) = default;
};

class SaveRefused : public std::runtime_error {
 public:
  SaveRefused() : std::runtime_error("a session containing unsound prunes cannot be saved") {}
};

class SessionFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Session of a document.  Throws SaveRefused on an unsound prune.
Session make_session(const Document& doc);
std::string write_session(const Session& s);
Session read_session(std::string_view text);

void save_session(const Document& doc, const std::string& path);
Session load_session_file(const std::string& path);

struct ReplayReport {
  size_t applied = 0;
  std::vector<std::pair<Action, std::string>> failed;
  bool aborted = false;
};

/// Replays `s` on `doc`, moving each action id by the offset of the
/// declaration that contains it.  When more than `threshold` of the actions
/// fail, `doc` is left as it was and the report says aborted.
ReplayReport replay(const Session& s, Document& doc, double threshold = 0.5);

}  // namespace altgr
