#pragma once

#include <string_view>
#include <vector>

#include "altgr/frontend.h"

namespace altgr::frontend {

std::vector<std::vector<RawExpr>> parse_trigger_text(std::string_view text);
std::vector<RawExpr> parse_term_text(std::string_view text);

/// Moves triggers written on an inner quantifier of a chain to the chain
/// head and checks every user trigger covers its block.
ExprRef normalize_quantifiers(const ExprRef& f, bool rigid_type_vars);

}  // namespace altgr::frontend
