#pragma once

#include <chrono>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypercube/errors.hpp"
#include "hypercube/io.hpp"
#include "hypercube/text.hpp"

namespace hypercube {

// ---------------------------------------------------------------------------
// Prompt templates

/// Substitutes {identifier} placeholders. Only tokens that look like
/// identifiers are treated as placeholders, so literal JSON braces in a
/// template pass through untouched. Missing variables fail before any
/// backend call.
inline std::string render_template(const std::string& tmpl,
                                   const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tmpl.size());
    size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] != '{') {
            out.push_back(tmpl[i++]);
            continue;
        }
        size_t close = tmpl.find('}', i + 1);
        bool identifier = close != std::string::npos && close > i + 1;
        if (identifier) {
            for (size_t j = i + 1; j < close; ++j) {
                unsigned char c = static_cast<unsigned char>(tmpl[j]);
                if (!(std::isalnum(c) || c == '_')) {
                    identifier = false;
                    break;
                }
            }
        }
        if (!identifier) {
            out.push_back(tmpl[i++]);
            continue;
        }
        std::string name = tmpl.substr(i + 1, close - i - 1);
        auto it = vars.find(name);
        if (it == vars.end())
            throw UsageError("template render: missing variable '" + name + "'");
        out += it->second;
        i = close + 1;
    }
    return out;
}

struct PromptTemplate {
    std::string id;
    std::string text;
    std::vector<std::string> required_placeholders;

    void validate() const {
        for (const auto& p : required_placeholders) {
            if (text.find("{" + p + "}") == std::string::npos)
                throw DataError("prompt template '" + id + "' lacks required placeholder {" + p +
                                "}");
        }
    }
};

/// All chat prompt templates, keyed by id. Ships with built-in defaults;
/// a prompts.json file ({"id": "template text", ...}) overrides them.
class PromptSet {
public:
    static PromptSet defaults() {
        PromptSet p;
        p.add({"decompose",
               "You are given a question and the list of index dimensions: {dimensions}.\n"
               "Break the question into retrieval components. Each component is a short\n"
               "entity or phrase from the question paired with the dimension it belongs to.\n"
               "Use only the listed dimensions. Reply with a JSON array of objects and\n"
               "nothing else, for example:\n"
               "[{\"dimension\": \"location\", \"content\": \"springfield\"}]\n\n"
               "Question: {question}\n",
               {"dimensions", "question"}});
        p.add({"answer",
               "Answer the question using only the retrieved documents below.\n"
               "If the question asks for a quantity or a specific fact, reply with the\n"
               "shortest answer that states it, without explanation.\n\n"
               "Question: {question}\n\nRetrieved documents:\n{documents}\n",
               {"question", "documents"}});
        p.add({"judge",
               "Compare a predicted answer against the reference answer for a question.\n"
               "Score correctness (1 if the prediction agrees with the key facts of the\n"
               "reference, else 0) and completeness (1 if the prediction covers the main\n"
               "points of the reference, else 0).\n"
               "Reply with JSON only:\n"
               "{\"correctness\": 0 or 1, \"completeness\": 0 or 1, \"explanation\": \"...\"}\n\n"
               "Question: {question}\nReference answer: {gold_answer}\n"
               "Predicted answer: {predicted_answer}\n",
               {"question", "gold_answer", "predicted_answer"}});
        p.add({"extract_pool",
               "List the salient entities and key phrases in the document below: names\n"
               "of places, people, organizations, events, dates, and domain-specific\n"
               "terms. Reply with a JSON array of strings and nothing else.\n\n"
               "Document: {document}\n",
               {"document"}});
        p.add({"summarize",
               "The following terms were grouped into one cluster:\n{entities}\n\n"
               "Describe in one short sentence what kind of entities this cluster\n"
               "contains.\n",
               {"entities"}});
        p.add({"consolidate",
               "These candidate category summaries describe groups of entities\n"
               "extracted from a corpus:\n{candidates}\n\n"
               "Merge overlapping categories into a small set of final categories.\n"
               "Reply with a JSON array of objects and nothing else, one per final\n"
               "category: [{\"name\": \"...\", \"description\": \"...\"}]. Names must be\n"
               "short lowercase identifiers.\n",
               {"candidates"}});
        return p;
    }

    static PromptSet load(const fs::path& path) {
        PromptSet p = defaults();
        Json j;
        try {
            j = Json::parse(read_file(path));
        } catch (const Json::exception& e) {
            throw DataError("invalid prompts file " + path.string() + ": " + e.what());
        }
        for (const auto& [id, text] : j.items()) {
            auto it = p.templates_.find(id);
            if (it == p.templates_.end())
                throw DataError("prompts file " + path.string() + ": unknown template id '" + id +
                                "'");
            it->second.text = text.get<std::string>();
            it->second.validate();
        }
        return p;
    }

    const PromptTemplate& get(const std::string& id) const {
        auto it = templates_.find(id);
        if (it == templates_.end()) throw UsageError("unknown prompt template id '" + id + "'");
        return it->second;
    }

    std::string render(const std::string& id,
                       const std::map<std::string, std::string>& vars) const {
        return render_template(get(id).text, vars);
    }

private:
    void add(PromptTemplate t) {
        t.validate();
        templates_.emplace(t.id, std::move(t));
    }

    std::map<std::string, PromptTemplate> templates_;
};

// ---------------------------------------------------------------------------
// Chat backends

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string chat(const std::string& model, const std::string& prompt,
                             double temperature) = 0;
    // Upper bound on in-flight requests callers should respect.
    virtual size_t max_parallelism() const { return 4; }
};

/// Content-address for a chat request; also the key format of scripted
/// reply files.
inline std::string chat_request_key(const std::string& model, const std::string& prompt) {
    return fnv1a64_hex(model + "\x1f" + prompt);
}

/// Replays canned replies keyed by prompt hash, for reproducible tests and
/// offline runs. File format: JSONL of {"prompt_hash": ..., "reply": ...}.
/// Multiple lines with the same hash form a queue consumed in file order;
/// once exhausted, the last reply repeats.
class ScriptedChatBackend : public ChatBackend {
public:
    ScriptedChatBackend() = default;

    static std::shared_ptr<ScriptedChatBackend> from_file(const fs::path& path) {
        auto backend = std::make_shared<ScriptedChatBackend>();
        for_each_jsonl(path, [&](size_t lineno, const Json& j) {
            if (!j.contains("prompt_hash") || !j.contains("reply"))
                throw DataError(path.string() + ":" + std::to_string(lineno) +
                                ": scripted line needs prompt_hash and reply");
            backend->add_reply(j.at("prompt_hash").get<std::string>(),
                               j.at("reply").get<std::string>());
        });
        return backend;
    }

    void add_reply(const std::string& prompt_hash, const std::string& reply) {
        replies_[prompt_hash].push_back(reply);
    }

    void script(const std::string& model, const std::string& prompt, const std::string& reply) {
        add_reply(chat_request_key(model, prompt), reply);
    }

    std::string chat(const std::string& model, const std::string& prompt,
                     double /*temperature*/) override {
        std::string key = chat_request_key(model, prompt);
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = replies_.find(key);
        if (it == replies_.end())
            throw BackendError("unscripted prompt (hash " + key + "): " +
                               prompt.substr(0, 120));
        auto& cursor = cursors_[key];
        const auto& queue = it->second;
        std::string reply = queue[std::min(cursor, queue.size() - 1)];
        ++cursor;
        return reply;
    }

private:
    std::map<std::string, std::vector<std::string>> replies_;
    std::map<std::string, size_t> cursors_;
    std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// Client with retry and content-addressed disk cache

struct LlmOptions {
    std::string chat_model = "default-chat";
    std::string embed_model = "default-embed";
    double temperature = 0.0;
    fs::path cache_dir;        // empty disables the disk cache
    int max_retries = 3;       // retry budget for retryable backend errors
    int retry_base_ms = 250;   // exponential backoff base; 0 in tests
    size_t max_in_flight = 4;  // bound on concurrent outbound requests
};

class LlmClient {
public:
    LlmClient(std::shared_ptr<ChatBackend> backend, PromptSet prompts, LlmOptions options)
        : backend_(std::move(backend)), prompts_(std::move(prompts)), options_(std::move(options)) {
        if (!options_.cache_dir.empty()) fs::create_directories(options_.cache_dir);
    }

    const PromptSet& prompts() const { return prompts_; }
    const LlmOptions& options() const { return options_; }

    std::string render(const std::string& template_id,
                       const std::map<std::string, std::string>& vars) const {
        return prompts_.render(template_id, vars);
    }

    /// Render a template and send it. Replies are cached by
    /// hash(model, rendered prompt); cached and fresh replies are
    /// byte-identical for identical requests.
    std::string chat(const std::string& template_id,
                     const std::map<std::string, std::string>& vars, bool bypass_cache = false) {
        return chat_prompt(render(template_id, vars), bypass_cache);
    }

    /// Send an already-rendered prompt (used for per-dimension extraction
    /// prompts that come from the index schema, not the template set).
    std::string chat_prompt(const std::string& prompt, bool bypass_cache = false) {
        std::string key = chat_request_key(options_.chat_model, prompt);
        fs::path cache_file;
        if (!options_.cache_dir.empty()) {
            cache_file = options_.cache_dir / ("chat-" + key + ".txt");
            if (!bypass_cache && fs::exists(cache_file)) return read_file(cache_file);
        }
        std::string reply = chat_with_retry(prompt);
        if (!cache_file.empty()) write_file_atomic(cache_file, reply);
        return reply;
    }

private:
    std::string chat_with_retry(const std::string& prompt) {
        int attempt = 0;
        for (;;) {
            try {
                return backend_->chat(options_.chat_model, prompt, options_.temperature);
            } catch (const BackendError& e) {
                if (!e.retryable() || attempt >= options_.max_retries) throw;
                int delay = options_.retry_base_ms * (1 << attempt);
                if (delay > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay));
                ++attempt;
            }
        }
    }

    std::shared_ptr<ChatBackend> backend_;
    PromptSet prompts_;
    LlmOptions options_;
};

}  // namespace hypercube
