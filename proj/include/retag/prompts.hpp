#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "retag/util.hpp"

namespace retag {

enum class OutputFormat { tuple_records, json_object, json_array, raw_text };

struct PromptTemplate {
  std::string name;
  std::string body;  // "{placeholder}" slots; "{{" / "}}" escape literal braces
  OutputFormat expected = OutputFormat::raw_text;
};

using VarMap = std::map<std::string, std::string>;

// Substitutes {name} placeholders. Every placeholder must be bound; literal
// braces in the template are written "{{" and "}}".
inline std::string render_template(const PromptTemplate& tpl, const VarMap& vars) {
  std::string out;
  out.reserve(tpl.body.size());
  const std::string& b = tpl.body;
  for (size_t i = 0; i < b.size();) {
    char c = b[i];
    if (c == '{') {
      if (i + 1 < b.size() && b[i + 1] == '{') {
        out.push_back('{');
        i += 2;
        continue;
      }
      size_t close = b.find('}', i + 1);
      if (close == std::string::npos)
        throw ParseError("template '" + tpl.name + "': unterminated placeholder");
      std::string key = b.substr(i + 1, close - i - 1);
      auto it = vars.find(key);
      if (it == vars.end())
        throw ParseError("template '" + tpl.name + "': unbound placeholder {" + key + "}");
      out += it->second;
      i = close + 1;
    } else if (c == '}') {
      if (i + 1 < b.size() && b[i + 1] == '}') {
        out.push_back('}');
        i += 2;
        continue;
      }
      throw ParseError("template '" + tpl.name + "': stray '}'");
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

namespace prompts {

// -------------------------------------------------------------------------
// Built-in prompt set. Bodies are plain text with {placeholder} slots; a
// prompts/ directory of files keyed by template name overrides any of them.
// -------------------------------------------------------------------------

inline const char* kExtractEntities = R"(-Goal-
Given a text document that is potentially relevant to this activity and a list of entity types,
identify all entities of those types from the text and all relationships among the identified entities.

-Steps-
1. Identify all entities. For each identified entity, extract the following information:
- entity_name: Name of the entity, capitalized
- entity_type: One of the following types: ["organization", "person", "geo", "event"]
- entity_description: Comprehensive description of the entity's attributes and activities
Format each entity as ("entity"{tuple_delimiter}<entity_name>{tuple_delimiter}<entity_type>{tuple_delimiter}<entity_description>)

2. From the entities identified in step 1, identify all pairs of (source_entity, target_entity)
that are *clearly related* to each other.
For each pair of related entities, extract the following information:
- source_entity: name of the source entity, as identified in step 1
- target_entity: name of the target entity, as identified in step 1
- relationship_description: explanation as to why you think the source entity and the target entity
are related to each other
- relationship_strength: a numeric score indicating strength of the relationship between
the source entity and target entity
Format each relationship as ("relationship"{tuple_delimiter}<source_entity>{tuple_delimiter}<target_entity>{tuple_delimiter}<relationship_description>{tuple_delimiter}<relationship_strength>)

3. Return output in English as a single list of all the entities and relationships
identified in steps 1 and 2. Use **{record_delimiter}** as the list delimiter.

4. When finished, output {completion_delimiter}

-Real Data-
text: {input_text}
output:
)";

inline const char* kExtractEntitiesTopic = R"(-Goal-
Given a specific topic and a text document, identify only those entities and relationships
from the text that are clearly relevant to the specified topic.

-Inputs-
- topic: A string describing the subject or theme of interest.
- text: A text document potentially containing entities and relationships.

-Steps-
1. From the text, identify all entities that are relevant to the topic.
For each relevant entity, extract the following information:
- entity_name: Name of the entity, capitalized
- entity_type: One of the following types: ["organization", "person", "geo", "event"]
- entity_description: Comprehensive description of the entity's attributes and activities
Format each entity as ("entity"{tuple_delimiter}<entity_name>{tuple_delimiter}<entity_type>{tuple_delimiter}<entity_description>)

2. From the entities identified in step 1, identify all pairs of (source_entity, target_entity)
that are *clearly related* to each other within the context of the topic.
For each pair of related entities, extract the following information:
- source_entity: name of the source entity, as identified in step 1
- target_entity: name of the target entity, as identified in step 1
- relationship_description: explanation as to why you think the source entity and the target entity
are related to each other
- relationship_strength: a numeric score indicating strength of the relationship between
the source entity and target entity
Format each relationship as ("relationship"{tuple_delimiter}<source_entity>{tuple_delimiter}<target_entity>{tuple_delimiter}<relationship_description>{tuple_delimiter}<relationship_strength>)

3. Return output in English as a single list of all the entities and relationships identified
in steps 1 and 2. Use **{record_delimiter}** as the list delimiter.

4. When finished, output {completion_delimiter}.

5. If there are no entities or relationships relevant to the topic, output
{completion_delimiter}.

-Real Data-
topic: {topic}
text: {input_text}
output:
)";

inline const char* kExtractReflection = R"(You previously extracted entities and relationships from the text below.
Review the text once more and decide whether important entities or relationships were missed.

text: {input_text}

previous extraction: {previous_output}

Answer with a single word: YES if another extraction pass is necessary, NO otherwise.
)";

inline const char* kReportSkeleton = R"(---Report Structure--
The report should include the following sections:
- TITLE: community's name that represents its key entities - title should be short but specific.
When possible, include representative named entities in the title.
- SUMMARY: An executive summary of the community's overall structure, how its entities are related
to each other, and significant information associated with its entities.
- IMPACT SEVERITY RATING: a float score between 0-10 that represents the severity of IMPACT posed by
entities within the community. IMPACT is the scored importance of a community.
- RATING EXPLANATION: Give a single sentence explanation of the IMPACT severity rating.
- DETAILED FINDINGS: A list of 5-10 key insights about the community. Each insight should have a
short summary followed by multiple paragraphs of explanatory text grounded according to the grounding
rules below. Be comprehensive.
Return output as a well-formed JSON-formatted string with the following format:
{{
"title": <report title>,
"summary": <executive summary>,
"rating": <impact severity rating>,
"rating explanation": <rating explanation>,
"findings": [
{{
"summary":<insight 1 summary>,
"explanation": <insight 1 explanation>
}},
{{
"summary":<insight 2 summary>,
"explanation": <insight 2 explanation>
}}
]
}}

---Grounding Rules--
Points supported by data should list their data references as follows:
"This is an example sentence supported by multiple data references
[Data: <dataset name> (record ids); <dataset name> (record ids)]."
Do not list more than 5 record ids in a single reference. Instead, list the top 5 most relevant
record ids and add "+more" to indicate that there are more.
Do not include information where the supporting evidence for it is not provided.
)";

inline std::string summarize_leaf_body() {
  return std::string(R"(---Role--
You are an AI assistant that helps a human analyst to perform general information discovery.
Information discovery is the process of identifying and assessing relevant information associated
with certain entities (e.g., organizations and individuals) within a network.

---Goal--
Write a comprehensive report of a community, given a list of entities that belong to the community
as well as their relationships and optional associated claims.
The report will be used to inform decision-makers about information associated with the community
and their potential impact. The content of this report includes an overview of the community's
key entities, their legal compliance, technical capabilities, reputation, and noteworthy claims.

)") + kReportSkeleton + R"(
---Community Data--
{input_text}

output:
)";
}

inline std::string summarize_nonleaf_body() {
  return std::string(R"(---Role--
You are an AI assistant that helps a human analyst to perform general information discovery.
Information discovery is the process of identifying and assessing relevant information associated
with certain entities (e.g., organizations and individuals), relations, communities within a network.

---Goal--
Write a comprehensive report of a community, given a list of entities that belong to the community
as well as their relationships and community reports
(If the combined entity and relationship descriptions exceed the token limit,
they should be replaced with the corresponding community-level report summary.).
The report will be used to inform decision-makers about information associated with the community and
their potential impact. The content of this report includes an overview of the community's key entities,
their legal compliance, technical capabilities, reputation, and noteworthy claims.

)") + kReportSkeleton + R"(
---Community Data--
{input_text}

output:
)";
}

inline std::string summarize_leaf_topic_body() {
  return std::string(R"(---Role--
You are an AI assistant that helps a human analyst to perform general information discovery.
Information discovery is the process of identifying and assessing relevant information associated
with certain entities (e.g., organizations and individuals) within a network.

---Goal--
Write a comprehensive report of a community, given a list of entities that belong to the community
as well as their relationships and optional associated claims. The report will be used to inform
decision-makers about information associated with the community and their potential impact.
In addition, ensure that the summary is explicitly dependent on the provided topic, reflecting
topic-specific aspects alongside the community's details. The content of this report includes an
overview of the community's key entities, their legal compliance, technical capabilities, reputation,
and noteworthy claims.

)") + kReportSkeleton + R"(
---Topic--
{topic}

---Community Data--
{input_text}

output:
)";
}

inline std::string summarize_nonleaf_topic_body() {
  return std::string(R"(---Role--
You are an AI assistant that helps a human analyst to perform general information discovery. Information
discovery is the process of identifying and assessing relevant information associated with certain
entities (e.g., organizations and individuals), relations, communities within a network.

---Goal--
Write a comprehensive report of a community, given a list of entities that belong to the community
as well as their relationships and community reports(If the combined entity and relationship
descriptions exceed the token limit, they should be replaced with the corresponding community-level
report summary.). The report will be used to inform decision-makers about information associated with
the community and their potential impact. In addition, ensure that the summary is explicitly dependent
on the provided topic, reflecting topic-specific aspects alongside the community's details.
The content of this report includes an overview of the community's key entities, their legal compliance,
technical capabilities, reputation, and noteworthy claims.

)") + kReportSkeleton + R"(
---Topic--
{topic}

---Community Data--
{input_text}

output:
)";
}

inline const char* kSubAnswer = R"(---Role--
You are a helpful assistant responding to questions about data in the tables provided.

---Goal--
Generate a response of the target format that responds to the user's question,
summarize all relevant information in the input data tables appropriate for the response length
and format, and incorporate any relevant general knowledge.
If you don't know the answer, just say so. Do not make anything up.
The response shall preserve the original meaning and use of modal verbs such as "shall", "may" or "will".
Points supported by data should list the relevant reports as references as follows:
"This is an example sentence supported by data references [Data: Reports (report ids)]"
Do not list more than 5 record ids in a single reference. Instead, list the top 5 most relevant record
ids and add "+more" to indicate that there are more.
Do not include information where the supporting evidence for it is not provided.
At the beginning of your response, generate an integer score between 0-100 that
indicates how **helpful** is this response in answering the user's question.

---Target response format---
{{
    "helpfulness_score": An integer between 0 and 100 that represents how helpful the
    response is in answering the user's question,
    "answer": The full response that directly addresses the user's question,
    following all instructions above
}}

---User Question---
{question}

---Data tables---
{input_text}

output:
)";

inline const char* kFinalAnswer = R"(--Role--
You are a helpful assistant responding to questions about a dataset by synthesizing perspectives
from multiple analysts.

---Goal--
Generate a response of the target format that responds to the user's question, summarize all the reports
from multiple analysts who focused on different parts of the dataset, and incorporate any relevant
general knowledge.
Note that the analysts' reports provided below are ranked in the **descending order of helpfulness**.
If you don't know the answer, just say so. Do not make anything up.
The final response should remove all irrelevant information from the analysts' reports and merge
the cleaned information into a comprehensive answer that provides explanations of all the key points
and implications appropriate for the response length and format.
Add sections and commentary to the response as appropriate for the length and format.
Style the response in markdown.
The response shall preserve the original meaning and use of modal verbs such as "shall", "may" or "will".
The response should also preserve all the data references previously included in the analysts' reports,
but do not mention the roles of multiple analysts in the analysis process.
Do not list more than 5 record ids in a single reference.
Instead, list the top 5 most relevant record ids and add "+more" to indicate that there are more.
Do not include information where the supporting evidence for it is not provided.

---Target response format---
{{
    "answer": The full response that directly addresses the user's question, following
    all instructions above
}}

---User Question---
{question}

---Analyst Reports---
{report_data}

output:
)";

inline const char* kTopicMineSub = R"(---Role--
You are a helpful assistant who responds to queries regarding data presented in the provided tables.

---Goal---
Your objective is to generate a response that adheres to the target JSON format.
Your response should extract a list of topics from the community report of a Graph RAG system.
This system is a graph-based Retrieval Augmented Generation approach designed to facilitate sensemaking
over a large text corpus.

---Instructions---
1. Topic Extraction with Global Sensemaking in Mind: Analyze the community report of the Graph RAG
system and identify topics of interest.
Here, "global sensemaking" refers to questions that can only be answered by having a comprehensive
understanding of the entire data corpus.
Focus on topics that are relevant for in-depth analysis and require considering the complete corpus.
2. Identify and extract a list of topics from the community report that might interest users of the
Graph RAG system.
3. Your final response must conform exactly to the following JSON structure:
{{
    "helpfulness_score": <an integer between 0 and 100>,
    "answer": [ "topic 1", "topic 2", ... ]
}}
4. The integer provided as helpfulness_score should reflect how helpful your response is in addressing
topic extraction.

***Do not provide any other explanations. Only output the JSON.***

---User Question---
{question}

---Community Reports---
{input_text}

output:
)";

inline const char* kTopicMineFinal = R"(---Role--
You are a helpful assistant who responds to queries related to topics derived from an overall graph.

-- Goal --
You are given a list of topics that were previously extracted from an entire graph.
The graph was built for use in a graph-based Retrieval-Augmented Generation (RAG) system,
designed to support global sensemaking over a large text corpus.

Your task is to extract a list of high-level topics that:
1. Are mentioned multiple times in the provided list.
2. Represent recurring and significant themes across the entire graph.
3. Are likely to be of interest to users interacting with the Graph RAG system.

-- Instructions --
1. Focus on global sensemaking: identify topics that appear repeatedly and contribute to a
broader understanding of the corpus.
2. Select only the topics that are mentioned multiple times and represent the main themes of the graph.
3. Output a final list of these topics in the following JSON format:
{{
    "answer": ["topic 1", "topic 2", ...]
}}
**Only return the JSON. Do not include any explanations.**

---User Question---
{question}

---Extracted Topic Lists---
{report_data}

output:
)";

inline const char* kDescribeSub = R"(---Role--
You are a helpful assistant who responds to queries regarding data presented in the provided tables.

---Goal---
Your objective is to generate a response that adheres to the target JSON format.
Your response should extract an overall summary of the primary subjects discussed in the dataset as
reflected by the community reports of a Graph RAG system.
This system is a graph-based Retrieval Augmented Generation approach designed to convert the dataset
into a graph and form communities to facilitate sensemaking over a large text corpus.

---Instructions---
1. Community-based Dataset Topic Extraction: Analyze the community reports that summarize how the
dataset has been transformed into a graph with communities, and extract a high-level summary of the main
topics or subjects that the dataset primarily addresses.
   Here, "overall" refers to a general summary focusing solely on the content topics and subjects,
   without extracting details about metadata, structure, or other fine-grained elements.
2. Identify and extract a summary that captures what the dataset is mainly about, based on the themes
emerging from the community reports.
3. Your final response must conform exactly to the following JSON structure:
{{
    "helpfulness_score": <an integer between 0 and 100>,
    "answer": <dataset description>
}}
4. The integer provided as helpfulness_score should reflect how helpful your response is in addressing
the dataset description extraction task.

***Do not provide any other explanations. Only output the JSON.***

---User Question---
{question}

---Community Reports---
{input_text}

output:
)";

inline const char* kDescribeFinal = R"(---Role--
You are a helpful assistant who responds to queries regarding dataset descriptions derived from an
overall graph.

---Goal---
You should extract an overall dataset description from the list of dataset descriptions that were
previously extracted from the entire graph.
The dataset description in your response should represent a summary of what the dataset is mainly about,
based on the recurring content themes identified in the overall graph.

---Instructions---
1. Dataset Description Extraction with Global Sensemaking in Mind:
   Analyze the given list of dataset descriptions from the entire graph, and identify a summary that
   encapsulates the primary focus of the dataset.
2. Identify and Extract the Dataset Description: From the provided list, select the elements that are
most frequently emphasized and that appear to represent the overall content focus of the dataset.
3. Your final response must conform exactly to the following JSON structure:
{{
    "answer": <dataset description>
}}
***Do not provide any other explanations. Only output the JSON.***

---User Question---
{question}

---Extracted Descriptions---
{report_data}

output:
)";

inline const char* kClassifyTopic = R"(You will receive input in a JSON format with the following structure:
{{
    "question": "<question text>",
    "topics": ["<topic1>", "<topic2>", "..."],
    "dataset_description": "<dataset description text>"
}}

---Task---
1. Topic selection:
Read the "question" and "dataset description" and analyze the list of "topics". Choose one topic
from the provided topics that is most relevant to the question referring to the dataset description.
The chosen topic must match one of the topics in the list exactly (case and punctuation must be
identical).
2. Output:
If a matching topic is found, return it exactly as provided in the input list.
If none of the topics is related to the question, return "null" as the value.
3. Output Format:
Your output must be in the following JSON format:
{{
    "choosed_topic": "<selected topic or null>"
}}
4. Reference Information:
Note that summarized reports dependent on the chosen topic will later be used to respond to the question.
The 'dataset_description' field provides information about the dataset corpus used to create those
summary reports. Your sole task here is to select the relevant topic based on the question and dataset
description; you do not need to generate the report.

---Input---
{payload}

output:
)";

inline const char* kExpandKeywords = R"(You will receive input in a JSON format with the following structure:
{{
    "question": "<question text>",
    "dataset_description": "<dataset description text>"
}}

---Task---
Using only the information provided in the JSON, analyze the `dataset_description` to identify which
fields, variables, metrics, or concepts are most critical for answering the `question`.
Then, generate a list of keywords that you would expect to find in a dataset subset summary report
to successfully answer the question.

Requirements:
1. Refer exclusively to the `dataset_description` - do not assume any external knowledge.
2. Extract concise keywords (one to three words each) representing dataset attributes, column names,
feature names, or important concepts.
3. Present your output as a JSON array of strings, for example:
   ["keyword_one", "keyword_two", "important_metric", ...]
4. Do not include any additional commentary or explanation - only output the JSON array.

---Input---
{payload}

output:
)";

inline const char* kGenUsers = R"(---Role---
You are a helpful assistant generating personas of hypothetical users of the Graph RAG system.

---Goal---
Given the high-level description of the dataset, generate a bulleted list of {n} personas that represent
different types of users who would benefit from using the system.
The Graph RAG system is a graph-based RAG approach that enables sensemaking over the entirety of
a large text corpus.

---Additional Instructions---
For each persona, briefly provide their job and key characteristics.
Do not include details about specific tasks they need to perform or reasons why that persona is expected.

Format your response as a JSON array of strings with the following structure (do not wrap your response
in a code block):
["persona 1", "persona 2", ...]

---Dataset Description---
{dataset_desc}

output:
)";

inline const char* kGenTasks = R"(---Role---
You are a helpful assistant generating tasks of a hypothetical persona of the Graph RAG system.

---Goal---
Given the high-level description of the dataset and the design of the Graph RAG system, and a
hypothetical persona of the Graph RAG system, generate a bulleted list of {n} tasks that represent
different types of tasks that the user would do using the system.
The Graph RAG system is a graph-based RAG approach that enables sensemaking over the entirety of
a large text corpus.

---Dataset Description---
{dataset_desc}

---Persona---
{persona}

---Response Format---
Your response should be formatted as a JSON object with a single key "task".
The value should be a list of strings representing the tasks, for example:
{{"task": ["task1", "task2", "task3"]}}
Do not wrap your response with any JSON or code block formatting.

output:
)";

inline const char* kGenQuestions = R"(---Role---
You are a helpful assistant generating high-level questions based on a given hypothetical
persona and their task using the Graph RAG system.

---Goal---
Given the high-level description of the dataset and the design of the Graph RAG system, and a
hypothetical persona of the Graph RAG system, generate a bulleted list of {n} questions that assess
a broad understanding of the entire corpus rather than requiring retrieval of specific low-level facts.
The Graph RAG system is a graph-based RAG approach that enables sensemaking over the entirety of a large
text corpus.

---Dataset Description---
{dataset_desc}

---Persona---
{persona}

---Task---
{task}

---Response Format---
Your response should be formatted as a JSON object with a single key "question".
The value should be a list of strings representing the questions, for example:
{{"question": ["question1", "question2"]}}
Do not wrap your response in a code block.

output:
)";

inline const char* kJudgePair = R"(---Role---
You are a helpful assistant responsible for grading two answers to a question provided by two different
people.

---Goal---
Given a question and two answers (Answer 1 and Answer 2), assess which answer is better according to
the following measure:
{criterion_description}

Your assessment should include two parts:
- Winner: either 1 (if Answer 1 is better), 2 (if Answer 2 is better), or 0 if they are fundamentally
similar.
- Reasoning: a short explanation of why you chose the winner with respect to the measure described above.
Format your response as a JSON object with the following structure:
{{"winner": <1, 2, or 0>, "reasoning": "Answer 1 is better because <your reasoning>."}}

---Question---
{question}

---Answer 1---
{answer_a}

---Answer 2---
{answer_b}

output:
)";

inline const char* kLabelRelevance = R"(You are tasked with evaluating summary reports for a graph-based Retrieval-Augmented Generation (RAG)
system that:
1. Converts the entire document corpus into a graph and forms communities.
2. Will perform **global sensemaking**, i.e. answer queries by synthesizing information from
**all** documents in the corpus.
3. Receives input in JSON format with two fields:
   - "question": the user's query
   - "report": a summary report generated over a subset of the corpus
Your task is to decide whether the provided summary report contains **sufficient** key information from
the full corpus to support answering the query under the global sensemaking paradigm.
**Output only** "YES" if the report genuinely helps answer the question, or "NO" if it does not.
Do not output anything else - no explanations, no extra tokens.

---Input---
{payload}

output:
)";

}  // namespace prompts

// Criterion rubrics for head-to-head judging.
inline const std::map<std::string, std::string>& criterion_descriptions() {
  static const std::map<std::string, std::string> table = {
      {"comprehensiveness",
       "How much detail does the answer provide to cover all the aspects and details of the "
       "question? A comprehensive answer should be thorough and complete, without being redundant "
       "or irrelevant. A comprehensive answer should not leave out any important points or provide "
       "irrelevant information."},
      {"diversity",
       "How varied and rich is the answer in providing different perspectives and insights on the "
       "question? A diverse answer should be multi-faceted and multi-dimensional, offering "
       "different viewpoints and angles on the question, supported by different sources and "
       "evidence."},
      {"empowerment",
       "How well does the answer help the reader understand and make informed judgements about the "
       "topic without being misled or making fallacious assumptions. Evaluate each answer on the "
       "quality of answer as it relates to clearly explaining and providing reasoning and sources "
       "behind the claims in the answer."},
  };
  return table;
}

class PromptLibrary {
 public:
  static PromptLibrary builtin() {
    PromptLibrary lib;
    auto add = [&](const std::string& name, std::string body, OutputFormat fmt) {
      lib.templates_[name] = PromptTemplate{name, std::move(body), fmt};
    };
    using namespace prompts;
    add("extract_entities", kExtractEntities, OutputFormat::tuple_records);
    add("extract_entities_topic", kExtractEntitiesTopic, OutputFormat::tuple_records);
    add("extract_reflection", kExtractReflection, OutputFormat::raw_text);
    add("summarize_leaf", summarize_leaf_body(), OutputFormat::json_object);
    add("summarize_nonleaf", summarize_nonleaf_body(), OutputFormat::json_object);
    add("summarize_leaf_topic", summarize_leaf_topic_body(), OutputFormat::json_object);
    add("summarize_nonleaf_topic", summarize_nonleaf_topic_body(), OutputFormat::json_object);
    add("sub_answer", kSubAnswer, OutputFormat::json_object);
    add("final_answer", kFinalAnswer, OutputFormat::json_object);
    add("topic_mine_sub", kTopicMineSub, OutputFormat::json_object);
    add("topic_mine_final", kTopicMineFinal, OutputFormat::json_object);
    add("describe_sub", kDescribeSub, OutputFormat::json_object);
    add("describe_final", kDescribeFinal, OutputFormat::json_object);
    add("classify_topic", kClassifyTopic, OutputFormat::json_object);
    add("expand_keywords", kExpandKeywords, OutputFormat::json_array);
    add("gen_users", kGenUsers, OutputFormat::json_array);
    add("gen_tasks", kGenTasks, OutputFormat::json_object);
    add("gen_questions", kGenQuestions, OutputFormat::json_object);
    add("judge_pair", kJudgePair, OutputFormat::json_object);
    add("label_relevance", kLabelRelevance, OutputFormat::raw_text);
    return lib;
  }

  // Overrides template bodies from plain-text files named after templates
  // (with or without a .txt suffix). Unknown names become raw-text templates.
  void load_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw StoreError("prompt directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      std::ostringstream body;
      body << in.rdbuf();
      std::string name = f.stem().string();
      auto it = templates_.find(name);
      OutputFormat fmt = it != templates_.end() ? it->second.expected : OutputFormat::raw_text;
      templates_[name] = PromptTemplate{name, body.str(), fmt};
    }
  }

  const PromptTemplate& get(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw ConfigError("unknown prompt template: " + name);
    return it->second;
  }

  bool has(const std::string& name) const { return templates_.count(name) > 0; }

  // Stable digest over all template bodies; recorded in store manifests.
  std::string version_hash() const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& [name, tpl] : templates_) {
      h = fnv1a64(name, h);
      h = fnv1a64(tpl.body, h);
    }
    return to_hex(h);
  }

  const std::map<std::string, PromptTemplate>& all() const { return templates_; }

 private:
  std::map<std::string, PromptTemplate> templates_;
};

}  // namespace retag
