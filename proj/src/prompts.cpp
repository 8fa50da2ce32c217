#include "evostmt/backends.hpp"
#include "evostmt/errors.hpp"

namespace evostmt {

namespace {

const char* kSeedPrompt =
    R"TPL(You are an expert in Lean 4 theorem proving and Mathlib.

Given a problem statement in natural language, write a COMPLETE Lean 4 file (imports + theorem)
that formalizes the mathematical content.

MANDATORY OUTPUT REQUIREMENTS:
- Output EXACTLY ONE Lean 4 code block: ```lean ... ```.
- The code MUST start with the following two lines (in this order):
  import Mathlib
  import Aesop
- You MAY add additional `import ...` / `open ...` / `set_option ...` lines after that if needed (unless a mode-specific prefix locks the header, e.g., diff mode).
- Do NOT include any comments.
- Include EXACTLY ONE `theorem` declaration.
- The theorem MUST end with `:= by sorry` (do not provide a proof).
- Use Lean 4 v4.15-compatible syntax and Mathlib definitions.

Natural language statement:
{informal}

Return ONLY the Lean 4 code block.)TPL";

const char* kPatchSkeleton =
    R"TPL(You are an expert in Lean 4 theorem proving and the Mathlib library.
Your task is to improve a Lean 4 formalization for a given natural language mathematical claim.

Hard requirements (must satisfy all):
- Output a COMPLETE Lean 4 file (imports + exactly one theorem) in a single ```lean``` code block.
- The code MUST start with these two lines (in this order):
  import Mathlib
  import Aesop
- You MAY add additional `import ...` / `open ...` / `set_option ...` lines after that if needed.
- Do NOT include any comments.
- Include EXACTLY ONE `theorem` declaration.
- The theorem MUST end with `:= by sorry` (do not provide a proof).

Quality goals:
- compile_ok: The file compiles without errors.
- semantic_ok: The theorem statement matches the informal mathematical meaning.

Natural language statement:
{informal}

Current Lean 4 program:
```lean
{code_content}
```

Evaluation results:
{performance_metrics}{text_feedback_section}

Return ONLY the Lean 4 code block.)TPL";

const char* kDiffPrefix =
    R"TPL(You are doing a LOCAL EDIT of a Lean 4 formalization file.
Header lock (diff mode only):
- Do NOT add/remove/reorder/modify any preamble lines (imports/opens/options).
- Keep everything before the `theorem` declaration EXACTLY unchanged.
Goal:
- Make the smallest possible change to improve compilation and formalization quality.
- Keep changes minimal; do NOT change the intended mathematical meaning.)TPL";

const char* kCrossPrefix =
    R"TPL(You are doing CROSS patching.
You are given one inspiration candidate from the archive/top-k pool as extra context.
Your task is to improve the current formalization by optionally borrowing useful structure from the inspiration.)TPL";

const char* kCrossContext =
    R"TPL([Inspiration candidate]
```lean
{inspiration_code_1}
```)TPL";

const char* kCompileRepair =
    R"TPL(You are an expert in Lean 4 theorem proving and Mathlib.
You are doing SYNTAX / COMPILATION REPAIR.

You will receive:
- A natural language statement (the semantic target)
- A Lean 4 file that fails to compile
- Compiler error feedback

Your job:
- Produce a corrected Lean 4 file that compiles.

IMPORTANT:
- Fix compilation only; do NOT change the intended mathematical meaning.
- Keep changes minimal (types, identifiers, imports, binder annotations, etc.).

Natural language statement:
{informal}

Current Lean 4 code (does NOT compile):
<CURRENT_CODE>
{original_code}
</CURRENT_CODE>

Compiler feedback:
- Error type: {compile_error_type}
- Error message:
```
{compile_error_msg}
```

Output requirements:
1) Output EXACTLY ONE ```lean``` code block (Lean 4; no extra text).
2) The code MUST start with:
   import Mathlib
   import Aesop
3) Do NOT include any comments.
4) Include EXACTLY ONE theorem, and end it with `:= by sorry`.)TPL";

const char* kSemanticRepair =
    R"TPL(You are an expert in mathematics and Lean 4 (Mathlib).
You are doing SEMANTIC REPAIR.

You will receive:
- A natural language statement (the semantic target)
- A Lean 4 file that is intended to formalize it
- Critic feedback (Accuracy Confirmation) describing mismatches

Your job:
- Modify the Lean 4 code so that the theorem statement matches the natural language statement.

Rules:
- You MAY change hypotheses and the conclusion if needed to match the semantics.
- You MAY adjust/add imports/opens/options as needed to keep the file compiling.
- Do NOT "solve" the task by weakening it to `True` or a tautology.
- Do NOT include any comments.
- Output a complete Lean 4 file starting with:
  import Mathlib
  import Aesop
- Include exactly one theorem, ending with `:= by sorry`.

Natural language statement:
{informal}

Current Lean 4 code:
<CURRENT_CODE>
{original_code}
</CURRENT_CODE>

Critic feedback (Accuracy Confirmation):
{critic_feedback}

Goal:
- Modify the Lean 4 theorem so that the semantic judge would accept it as an exact formalization of the natural-language statement.
- Address every mismatch mentioned in the Critic feedback.

Output requirements:
1) Output EXACTLY ONE ```lean``` code block (Lean 4; no extra text).
2) The code MUST start with:
   import Mathlib
   import Aesop
3) Do NOT include any comments.
4) Include EXACTLY ONE theorem, and end it with `:= by sorry`.)TPL";

const char* kJudgePrompt =
    R"TPL(Role: Lean 4 & Formal Verification Expert
Input:
- Mathematical_Text: A math problem and its answer (no proof).
- Lean4Code: A Lean 4 theorem statement formalizing the problem (proof intentionally omitted).
Goal:
Determine if the Lean 4 theorem statement is an exact and faithful formalization of the mathematical problem.
Do not evaluate or consider the answer or the proof. Your sole task is to verify the correctness of the formalization.

Evaluation Stages (All required):
1. Math Assertion Analysis
Identify all structurally and semantically relevant components of the mathematical problem, including
variables, types, quantifiers, constraints, logic structure, conclusion, and so on. The analysis should be
based on the actual content of the text.

2. Lean 4 Statement Analysis (ignore proof part)
Extract all structurally and semantically relevant components from the Lean 4 statement, including
variables, types, conditions, quantifiers, constraints, the final claim, and so on. The analysis should
reflect the actual content present in the Lean 4 code.

3. Comparative Verification
Check for exact correspondence between the math and Lean 4 statements; you may refer to aspects like:
- Semantic alignment, logic structure, and quantifier correctness.
- Preservation of constraints and boundary assumptions.
- Accurate typing and use of variables.
- Syntactic validity and proper Lean 4 usage (free from errors).
- Use of symbols and constructs without semantic drift.
- No missing elements, no unjustified additions, and no automatic corrections or completions.

4. Final Judgement
Based solely on the above analysis, judge whether the Lean 4 statement is a correct and exact formalization
of the mathematical problem.

5. Accuracy Confirmation
If correct: clearly confirm why all elements match.
If incorrect: list all mismatches and explain how each one affects correctness.

Note: The final judgment must be based only on what is explicitly and formally expressed in the Lean 4 statement.
Do not consider or assess any part of the proof. Your judgment should be entirely about the accuracy of the statement formalization.

Output Format:
Return exactly one JSON object:
{
  "reasons": "<your detailed analysis as a single string>",
  "is_assistant_correct": "Correct or Incorrect"
}

Input Data:
-- Start of Mathematical_Text --
{informal}
-- End of Mathematical_Text --
-- Start of Lean4Code --
{lean_statement}
-- End of Lean4Code --)TPL";

const char* kProverPrompt =
    R"TPL(Complete the following Lean 4 code.
Return ONLY a complete Lean 4 file inside a ```lean4``` code fence (no explanations).
```lean4
{lean_file}
```)TPL";

}  // namespace

const PromptTemplates& PromptTemplates::defaults() {
  static const PromptTemplates t = [] {
    PromptTemplates p;
    p.seed = kSeedPrompt;
    p.patch_skeleton = kPatchSkeleton;
    p.full_addenda = {
        "(i) Default rewrite: revise types/hypotheses/structure as needed.",
        "(ii) Different interpretation: try a different reasonable formalization of the same claim.",
        "(iii) Type optimization: improve binder structure and type-class constraints.",
        "(iv) Mathlib alignment: prefer standard Mathlib names and definitions.",
        "(v) Simplification: if possible, state a simpler claim without changing meaning.",
    };
    p.diff_prefix = kDiffPrefix;
    p.cross_prefix = kCrossPrefix;
    p.cross_context = kCrossContext;
    p.compile_repair = kCompileRepair;
    p.semantic_repair = kSemanticRepair;
    p.judge = kJudgePrompt;
    p.prover = kProverPrompt;
    return p;
  }();
  return t;
}

namespace {

void substitute(std::string& text, const std::string& name, const std::string& value) {
  const std::string pattern = "{" + name + "}";
  std::size_t pos = 0;
  while ((pos = text.find(pattern, pos)) != std::string::npos) {
    text.replace(pos, pattern.size(), value);
    pos += value.size();
  }
}

void require_field(const std::string& value, const char* placeholder) {
  if (value.empty()) throw MissingPlaceholder(placeholder);
}

}  // namespace

const char* gen_mode_name(GenMode m) {
  switch (m) {
    case GenMode::Seed: return "seed";
    case GenMode::Full: return "full";
    case GenMode::Diff: return "diff";
    case GenMode::Cross: return "cross";
    case GenMode::CompileRepair: return "compile_repair";
    case GenMode::SemanticRepair: return "semantic_repair";
  }
  return "?";
}

std::string render_prompt(const GeneratorRequest& req, const PromptTemplates& templates) {
  require_field(req.informal_text, "informal");
  std::string out;
  switch (req.mode) {
    case GenMode::Seed:
      out = templates.seed;
      break;
    case GenMode::Full: {
      Rng rng(req.rng_seed);
      const auto& addenda = templates.full_addenda;
      out = addenda[rng.uniform_index(addenda.size())] + "\n" + templates.patch_skeleton;
      require_field(req.parent_text, "code_content");
      break;
    }
    case GenMode::Diff:
      out = templates.diff_prefix + "\n" + templates.patch_skeleton;
      require_field(req.parent_text, "code_content");
      break;
    case GenMode::Cross:
      if (req.inspirations.empty()) throw MissingPlaceholder("inspiration_code_1");
      out = templates.cross_prefix + "\n" + templates.patch_skeleton + "\n" + templates.cross_context;
      require_field(req.parent_text, "code_content");
      break;
    case GenMode::CompileRepair:
      out = templates.compile_repair;
      require_field(req.parent_text, "original_code");
      require_field(req.compile_error_type, "compile_error_type");
      break;
    case GenMode::SemanticRepair:
      out = templates.semantic_repair;
      require_field(req.parent_text, "original_code");
      require_field(req.critic_feedback, "critic_feedback");
      break;
  }
  substitute(out, "informal", req.informal_text);
  substitute(out, "code_content", req.parent_text);
  substitute(out, "original_code", req.parent_text);
  substitute(out, "performance_metrics", req.performance_metrics);
  substitute(out, "text_feedback_section", req.text_feedback_section);
  substitute(out, "compile_error_type", req.compile_error_type);
  substitute(out, "compile_error_msg", req.compile_error_msg);
  substitute(out, "critic_feedback", req.critic_feedback);
  if (!req.inspirations.empty()) substitute(out, "inspiration_code_1", req.inspirations.front());
  return out;
}

std::string render_judge_prompt(const std::string& informal, const std::string& lean_statement,
                                const PromptTemplates& templates) {
  std::string out = templates.judge;
  substitute(out, "informal", informal);
  substitute(out, "lean_statement", lean_statement);
  return out;
}

std::string render_prover_prompt(const std::string& lean_file, const PromptTemplates& templates) {
  std::string out = templates.prover;
  substitute(out, "lean_file", lean_file);
  return out;
}

std::optional<std::string> extract_code_block(const std::string& response) {
  std::size_t pos = 0;
  while ((pos = response.find("```", pos)) != std::string::npos) {
    std::size_t tag_start = pos + 3;
    std::size_t line_end = response.find('\n', tag_start);
    if (line_end == std::string::npos) return std::nullopt;
    std::string tag = response.substr(tag_start, line_end - tag_start);
    while (!tag.empty() && (tag.back() == '\r' || tag.back() == ' ')) tag.pop_back();
    if (tag == "lean" || tag == "lean4") {
      std::size_t body_start = line_end + 1;
      std::size_t close = response.find("```", body_start);
      if (close == std::string::npos) return std::nullopt;
      return response.substr(body_start, close - body_start);
    }
    pos = line_end;
  }
  return std::nullopt;
}

}  // namespace evostmt
