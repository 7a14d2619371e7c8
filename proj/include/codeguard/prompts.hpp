#pragma once

// Versioned prompt templates. Placeholders are written {{NAME}}; values are
// substituted in a single pass and never re-scanned. Any wording change must
// bump the template's version, since replay fixtures are keyed on the
// rendered text.

#include <map>
#include <string>
#include <string_view>

namespace codeguard::prompts {

struct Template {
  std::string_view id;  // "<name>.v<version>"
  std::string_view system;
  std::string_view user;
};

inline constexpr Template kExtraction{
    "extract.v1",
    R"(You are a software security expert. You analyse fixed vulnerabilities and distil reusable secure-coding knowledge from them.)",
    R"(Analyse the following vulnerability and its fix.

CVE description:
<<<
{{CVE_DESCRIPTION}}
>>>

CWE type: {{CWE_ID}}

Function-level diff with full function context ('-' lines come from the vulnerable version, '+' lines from the fixed version):
<<<
{{DIFF}}
>>>

Describe the knowledge along three dimensions:
- Functionality: what the vulnerable code does, phrased as a programming task and without mentioning the vulnerability.
- Root cause: why the code is vulnerable, with a short code example of the vulnerable pattern.
- Fixing pattern: the secure coding practice applied by the fix, with a short code example of the corrected pattern.

If the fix addresses several distinct root causes, describe each one separately.
Output one block per root cause in exactly this format and nothing else:
===ENTRY===
FUNCTIONALITY: <one sentence>
ROOT_CAUSE_DESC: <explanation>
ROOT_CAUSE_CODE:
```
<vulnerable snippet>
```
FIX_DESC: <explanation>
FIX_CODE:
```
<fixed snippet>
```)"};

inline constexpr Template kDecomposition{
    "decompose.v1",
    R"(You are an experienced software engineer who plans implementations step by step.)",
    R"(Decompose the following code generation request into a short ordered list of fine-grained sub-tasks. Each sub-task must describe one concrete operation the code has to perform, such as allocating memory, copying a string or formatting output.

Request:
{{QUERY}}

Answer with a numbered list, one sub-task per line, and nothing else.)"};

inline constexpr Template kGeneration{
    "generate.v1",
    R"(You are an expert programmer. Write correct and secure code that satisfies the user's request.)",
    R"({{PROMPT}})"};

// Headings and fixed lines of the assembled generation prompt.
inline constexpr std::string_view kQueryHeading = "### Task";
inline constexpr std::string_view kExamplesHeading = "### Reference code examples";
inline constexpr std::string_view kSecurityHeading = "### Security knowledge";
inline constexpr std::string_view kSecurityPreamble =
    "The following sub-tasks of the request are prone to vulnerabilities. "
    "Apply the security knowledge listed for each of them.";
inline constexpr std::string_view kAnswerInstruction =
    "Respond with the complete implementation in a single fenced code block.";

// Substitutes {{NAME}} placeholders. Throws ConfigError on an unknown or
// unterminated placeholder.
std::string render(std::string_view text, const std::map<std::string, std::string>& values);

}  // namespace codeguard::prompts
