#pragma once

// Template bytes compiled from assets/prompts/<version>/*.txt.
namespace zoomrl::assets {

extern const char* const kPromptVersion;
extern const char* const k_system_prompt;
extern const char* const k_user_prompt;
extern const char* const k_tool_response;

}  // namespace zoomrl::assets
