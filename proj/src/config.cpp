#include "rankkit/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>

#include "rankkit/protocol.hpp"

namespace rankkit {

namespace {

void check_keys(const nlohmann::json& obj, const std::string& context,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object())
    throw ValidationError("config: " + context + " must be an object");
  const std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key))
      throw ValidationError("config: unknown key \"" + key + "\" in " + context);
  }
}

ChatEndpointConfig chat_endpoint(const nlohmann::json& j, const std::string& context) {
  check_keys(j, context,
             {"url", "model", "api_key_env_var", "temperature", "max_concurrent",
              "timeout_ms"});
  ChatEndpointConfig c;
  c.url = j.value("url", std::string());
  c.model = j.value("model", std::string());
  c.api_key_env_var = j.value("api_key_env_var", std::string());
  c.temperature = j.value("temperature", 0.0);
  c.max_concurrent = j.value("max_concurrent", 4);
  c.timeout_ms = j.value("timeout_ms", 30000);
  return c;
}

}  // namespace

std::filesystem::path PipelineConfig::judge_cache() const {
  return judges.cache_path.empty() ? cache_dir / "judge_votes.jsonl" : judges.cache_path;
}

std::filesystem::path PipelineConfig::teacher_cache() const {
  return acquisition.teacher_cache_path.empty() ? cache_dir / "teacher_scores.jsonl"
                                                : acquisition.teacher_cache_path;
}

std::filesystem::path PipelineConfig::generator_cache() const {
  return acquisition.generator_cache_path.empty() ? cache_dir / "ce_targets.jsonl"
                                                  : acquisition.generator_cache_path;
}

std::filesystem::path PipelineConfig::quality_judge_cache() const {
  return eval.judge_cache_path.empty() ? cache_dir / "quality_judge.jsonl"
                                       : eval.judge_cache_path;
}

std::string PipelineConfig::instruction_or_default() const {
  return protocol.instruction.empty() ? protocol::kDefaultInstruction
                                      : protocol.instruction;
}

std::string PipelineConfig::system_prompt_or_default() const {
  return protocol.system_prompt.empty() ? protocol::kDefaultSystemPrompt
                                        : protocol.system_prompt;
}

std::string PipelineConfig::rubric_or_default() const {
  return judges.rubric.empty() ? judges::kDefaultRubric : judges.rubric;
}

void PipelineConfig::validate() const {
  if (!(balance.target_h > 0.0) || balance.target_h > 1.0)
    throw ValidationError("config: balance.target_h must lie in (0,1]");
  if (!(split.dev_fraction > 0.0) || !(split.dev_fraction < 1.0))
    throw ValidationError("config: split.dev_fraction must lie in (0,1)");
  if (eval.k < 1) throw ValidationError("config: eval.k must be >= 1");
  if (acquisition.keyword_rewrite_rate < 0.0 || acquisition.keyword_rewrite_rate > 1.0)
    throw ValidationError("config: acquisition.keyword_rewrite_rate must lie in [0,1]");
  if (acquisition.per_dataset_cap < 0)
    throw ValidationError("config: acquisition.per_dataset_cap must be >= 0");
  scorer.weights.validate();
  if (!(scorer.kl_temperature > 0.0))
    throw ValidationError("config: scorer.kl_temperature must be positive");
  if (!(scorer.infonce_margin_epsilon > 0.0) || scorer.infonce_margin_epsilon > 1.0)
    throw ValidationError("config: scorer.infonce_margin_epsilon must lie in (0,1]");
  std::set<std::string> judge_ids;
  for (const auto& spec : judges.panel) {
    spec.validate();
    if (!judge_ids.insert(spec.judge_id).second)
      throw ValidationError("config: duplicate judge_id " + spec.judge_id);
  }
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  check_keys(j, "top level",
             {"seed", "cache_dir", "protocol", "judges", "acquisition", "balance",
              "split", "eval", "scorer"});
  PipelineConfig config;
  config.seed = j.value("seed", std::uint64_t{42});
  config.cache_dir = j.value("cache_dir", std::string(".rankkit_cache"));

  if (j.contains("protocol")) {
    const auto& p = j.at("protocol");
    check_keys(p, "protocol", {"instruction", "system_prompt"});
    config.protocol.instruction = p.value("instruction", std::string());
    config.protocol.system_prompt = p.value("system_prompt", std::string());
  }

  if (j.contains("judges")) {
    const auto& p = j.at("judges");
    check_keys(p, "judges",
               {"panel", "rubric", "cache_path", "threshold", "short_circuit",
                "max_retries", "retry_base_delay_ms"});
    if (p.contains("panel")) {
      for (const auto& item : p.at("panel")) {
        check_keys(item, "judges.panel entry",
                   {"judge_id", "endpoint_url", "model_name", "api_key_env_var",
                    "max_concurrent", "timeout_ms"});
        JudgeSpec spec;
        spec.judge_id = item.value("judge_id", std::string());
        spec.endpoint_url = item.value("endpoint_url", std::string());
        spec.model_name = item.value("model_name", std::string());
        spec.api_key_env_var = item.value("api_key_env_var", std::string());
        spec.max_concurrent = item.value("max_concurrent", 4);
        spec.timeout_ms = item.value("timeout_ms", 30000);
        config.judges.panel.push_back(std::move(spec));
      }
    }
    config.judges.rubric = p.value("rubric", std::string());
    config.judges.cache_path = p.value("cache_path", std::string());
    config.judges.threshold = p.value("threshold", 0);
    config.judges.short_circuit = p.value("short_circuit", false);
    config.judges.max_retries = p.value("max_retries", 3);
    config.judges.retry_base_delay_ms = p.value("retry_base_delay_ms", 250);
  }

  if (j.contains("acquisition")) {
    const auto& p = j.at("acquisition");
    check_keys(p, "acquisition",
               {"teacher", "teacher_cache_path", "search", "rewriter", "generator",
                "generator_cache_path", "keyword_rewrite_rate", "per_dataset_cap",
                "max_retries"});
    if (p.contains("teacher")) {
      const auto& t = p.at("teacher");
      check_keys(t, "acquisition.teacher",
                 {"url", "api_key_env_var", "request_template", "query_pointer",
                  "document_pointer", "document_as_array", "score_pointer",
                  "timeout_ms", "max_concurrent"});
      auto& teacher = config.acquisition.teacher;
      teacher.url = t.value("url", std::string());
      teacher.api_key_env_var = t.value("api_key_env_var", std::string());
      teacher.request_template = t.value("request_template", nlohmann::json::object());
      teacher.query_pointer = t.value("query_pointer", std::string("/query"));
      teacher.document_pointer = t.value("document_pointer", std::string("/documents"));
      teacher.document_as_array = t.value("document_as_array", true);
      teacher.score_pointer =
          t.value("score_pointer", std::string("/results/0/relevance_score"));
      teacher.timeout_ms = t.value("timeout_ms", 30000);
      teacher.max_concurrent = t.value("max_concurrent", 4);
    }
    if (p.contains("search")) {
      const auto& s = p.at("search");
      check_keys(s, "acquisition.search",
                 {"url", "api_key_env_var", "api_key_header", "api_key_prefix",
                  "request_template", "query_pointer", "top_k_pointer",
                  "results_pointer", "content_pointer", "url_field_pointer",
                  "timeout_ms"});
      auto& search = config.acquisition.search;
      search.url = s.value("url", std::string());
      search.api_key_env_var = s.value("api_key_env_var", std::string());
      search.api_key_header = s.value("api_key_header", std::string("Authorization"));
      search.api_key_prefix = s.value("api_key_prefix", std::string("Bearer "));
      search.request_template = s.value("request_template", nlohmann::json::object());
      search.query_pointer = s.value("query_pointer", std::string("/query"));
      search.top_k_pointer = s.value("top_k_pointer", std::string("/max_results"));
      search.results_pointer = s.value("results_pointer", std::string("/results"));
      search.content_pointer = s.value("content_pointer", std::string("/content"));
      search.url_field_pointer = s.value("url_field_pointer", std::string("/url"));
      search.timeout_ms = s.value("timeout_ms", 30000);
    }
    if (p.contains("rewriter"))
      config.acquisition.rewriter = chat_endpoint(p.at("rewriter"), "acquisition.rewriter");
    if (p.contains("generator"))
      config.acquisition.generator =
          chat_endpoint(p.at("generator"), "acquisition.generator");
    config.acquisition.teacher_cache_path = p.value("teacher_cache_path", std::string());
    config.acquisition.generator_cache_path =
        p.value("generator_cache_path", std::string());
    config.acquisition.keyword_rewrite_rate = p.value("keyword_rewrite_rate", 0.30);
    config.acquisition.per_dataset_cap = p.value("per_dataset_cap", std::int64_t{0});
    config.acquisition.max_retries = p.value("max_retries", 3);
  }

  if (j.contains("balance")) {
    const auto& p = j.at("balance");
    check_keys(p, "balance", {"target_h"});
    config.balance.target_h = p.value("target_h", 0.99);
  }

  if (j.contains("split")) {
    const auto& p = j.at("split");
    check_keys(p, "split", {"dev_fraction"});
    config.split.dev_fraction = p.value("dev_fraction", 0.1);
  }

  if (j.contains("eval")) {
    const auto& p = j.at("eval");
    check_keys(p, "eval",
               {"k", "force_insert", "force_insert_depth", "quality_judge",
                "extractor", "judge_cache_path", "max_retries"});
    config.eval.k = p.value("k", 10);
    config.eval.force_insert = p.value("force_insert", false);
    config.eval.force_insert_depth = p.value("force_insert_depth", 100);
    if (p.contains("quality_judge"))
      config.eval.quality_judge = chat_endpoint(p.at("quality_judge"), "eval.quality_judge");
    if (p.contains("extractor"))
      config.eval.extractor = chat_endpoint(p.at("extractor"), "eval.extractor");
    config.eval.judge_cache_path = p.value("judge_cache_path", std::string());
    config.eval.max_retries = p.value("max_retries", 3);
  }

  if (j.contains("scorer")) {
    const auto& p = j.at("scorer");
    check_keys(p, "scorer",
               {"gamma_point", "gamma_sft", "kl_direction", "kl_temperature",
                "infonce_margin_epsilon"});
    config.scorer.weights.gamma_point = p.value("gamma_point", 20.0);
    config.scorer.weights.gamma_sft = p.value("gamma_sft", 1.0);
    const std::string direction = p.value("kl_direction", std::string("teacher_student"));
    if (direction == "teacher_student") {
      config.scorer.kl_direction = KlDirection::teacher_student;
    } else if (direction == "student_teacher") {
      config.scorer.kl_direction = KlDirection::student_teacher;
    } else {
      throw ValidationError("config: scorer.kl_direction must be teacher_student or "
                            "student_teacher");
    }
    config.scorer.kl_temperature = p.value("kl_temperature", 2.0);
    config.scorer.infonce_margin_epsilon = p.value("infonce_margin_epsilon", 0.1);
  }

  config.validate();
  return config;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded())
    throw ValidationError("config file " + path.string() + " is not valid JSON");
  return from_json(j);
}

}  // namespace rankkit
