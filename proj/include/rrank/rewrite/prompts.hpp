#pragma once

#include <string>

#include "rrank/core/types.hpp"

namespace rrank {

// The six prompt templates of the rewriting pipeline. Placeholders:
//   {query}            the original query text
//   {rewriting query}  the candidate rewrite under evaluation
//   {agent}            the role noun phrase ("a woman", "an elder", ...)
//   {intent}           the extracted intent summary
enum class TemplateId {
    A_intent,
    B_rewrite,
    C_check,
    D_fix_semantic,
    E_fix_persona,
    F_fix_both,
};

std::string template_id_name(TemplateId id);  // "a".."f"

const std::string& template_text(TemplateId id);

struct PromptContext {
    std::string query;
    std::string rewriting_query;
    std::string agent;
    std::string intent;
};

// Substitutes every placeholder the template references; throws DataError if a
// referenced placeholder has no value in the context.
std::string render_prompt(TemplateId id, const PromptContext& ctx);

}  // namespace rrank
