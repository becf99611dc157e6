#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emobias/taxonomy.hpp"

namespace emobias {

enum class Strategy { ZeroShot, PromptEng, InContext, CoT };

std::string_view to_string(Strategy s) noexcept;
std::optional<Strategy> strategy_from_string(std::string_view s);

// Decoding budget: 256 new tokens for chain-of-thought, 64 otherwise.
constexpr int max_new_tokens(Strategy s) noexcept { return s == Strategy::CoT ? 256 : 64; }

// How a completion produced under each strategy is reduced to labels.
constexpr ParseMode default_parse_mode(Strategy s) noexcept {
  return s == Strategy::CoT ? ParseMode::ScanAfterMarker : ParseMode::List;
}

// Where the debiasing sentence goes in the PromptEng template.
enum class DebiasPlacement {
  AfterInstruction,  // new line right after "...feels simultaneously."
  BeforeCaption,     // new line right before "Caption:"
};

std::string_view to_string(DebiasPlacement p) noexcept;
std::optional<DebiasPlacement> debias_placement_from_string(std::string_view s);

struct PromptOptions {
  DebiasPlacement debias_placement = DebiasPlacement::AfterInstruction;
};

struct PromptText {
  std::string text;
  Strategy strategy = Strategy::ZeroShot;
  std::string caption_record_id;
};

inline constexpr std::string_view kTemplateVersion = "1";

// Raw template with "{labels}" and "{caption}" placeholders.
std::string prompt_template(Strategy s, const PromptOptions& options = {});

// Template for the gender question used by logit-equalization fine-tuning;
// placeholders "{caption}" and "{labels}" (ground truth).
std::string gender_question_template();

// Hash over every template, recorded in run manifests.
std::string template_version_hash(const PromptOptions& options = {});

PromptText build_prompt(Strategy strategy, std::string_view caption,
                        std::string_view caption_record_id = {},
                        const PromptOptions& options = {});

std::string build_gender_question_prompt(std::string_view caption, const LabelSet& ground_truth);

// Recovers the caption being asked about from a prompt built by build_prompt:
// the text after the "Caption:" that precedes an empty answer cue. Returns
// nullopt when no such slot exists.
std::optional<std::string> extract_caption(std::string_view prompt);

}  // namespace emobias
