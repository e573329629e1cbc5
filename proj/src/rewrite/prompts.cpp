#include "rrank/rewrite/prompts.hpp"

#include <array>

#include "rrank/errors.hpp"

namespace rrank {

namespace {

// Templates b and d-f carry labeled context blocks so regeneration sees the
// intent, the original query, and the rejected candidate.
const std::array<std::string, 6> kTemplates = {
    // a: intent extraction
    "The search query is {query}. Please analyze and determine the actual intention or "
    "meaning that the person is trying to convey through this search query.",
    // b: persona rewrite
    "Assuming you are {agent}, what changes might you make when rewriting the query? "
    "Please rewrite the query to align it with your role.\n\n"
    "Query intent: {intent}",
    // c: two-axis quality check
    "The original query is: {query}. The rephrased query is: {rewriting query}. "
    "Evaluate the following:1. Are these two queries describing the same information? "
    "2. Does the modified query align with the query posed by {agent}? "
    "Assign judgment scores of -1, 0, or 1. A score of -1 implies no match, 0 suggests "
    "an approximate match, and 1 indicates an exact match.",
    // d: regenerate, semantic fidelity failed
    "Assuming you are {agent}, please rephrase the query in accordance with your role "
    "while preserving the original meaning of the question.\n\n"
    "Original query: {query}\nQuery intent: {intent}\nPrevious rewrite: {rewriting query}",
    // e: regenerate, persona conformity failed
    "Assuming you are {agent}, please rephrase the query according to your role and "
    "rewrite it more in line with the character's attributes.\n\n"
    "Original query: {query}\nQuery intent: {intent}\nPrevious rewrite: {rewriting query}",
    // f: regenerate, both failed
    "Assuming you are {agent}, please rephrase the question consistent with your role, "
    "maintaining the essence of the original query and aligning it with the character's "
    "attributes.\n\n"
    "Original query: {query}\nQuery intent: {intent}\nPrevious rewrite: {rewriting query}",
};

void substitute_all(std::string& text, const std::string& placeholder, const std::string& value,
                    TemplateId id) {
    std::size_t pos = 0;
    while ((pos = text.find(placeholder, pos)) != std::string::npos) {
        if (value.empty()) {
            throw DataError("template " + template_id_name(id) + " references " + placeholder +
                            " but no value was provided");
        }
        text.replace(pos, placeholder.size(), value);
        pos += value.size();
    }
}

}  // namespace

std::string template_id_name(TemplateId id) {
    switch (id) {
        case TemplateId::A_intent: return "a";
        case TemplateId::B_rewrite: return "b";
        case TemplateId::C_check: return "c";
        case TemplateId::D_fix_semantic: return "d";
        case TemplateId::E_fix_persona: return "e";
        case TemplateId::F_fix_both: return "f";
    }
    throw DataError("invalid template id");
}

const std::string& template_text(TemplateId id) {
    return kTemplates[static_cast<std::size_t>(id)];
}

std::string render_prompt(TemplateId id, const PromptContext& ctx) {
    std::string text = template_text(id);
    substitute_all(text, "{query}", ctx.query, id);
    substitute_all(text, "{rewriting query}", ctx.rewriting_query, id);
    substitute_all(text, "{agent}", ctx.agent, id);
    substitute_all(text, "{intent}", ctx.intent, id);
    return text;
}

}  // namespace rrank
