#include "prcot/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "prcot/serde.hpp"

namespace prcot {

namespace {

std::string require_string(const ojson& j, const char* field, const std::string& where) {
    if (!j.contains(field)) {
        throw ValidationError(where + ": missing field '" + field + "'");
    }
    if (!j.at(field).is_string()) {
        throw ValidationError(where + ": field '" + field + "' must be a string");
    }
    return j.at(field).get<std::string>();
}

}  // namespace

std::vector<TaskInstance> parse_dataset(const std::string& jsonl_text, const std::string& origin) {
    std::vector<TaskInstance> tasks;
    std::set<std::string> ids;
    std::istringstream in(jsonl_text);
    std::string line;
    size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = origin + " line " + std::to_string(line_no);

        ojson j;
        try {
            j = ojson::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(where + ": invalid JSON: " + e.what());
        }

        TaskInstance task;
        task.id = require_string(j, "id", where);
        task.kind = task_kind_from_string(require_string(j, "kind", where));
        task.query = require_string(j, "query", where);

        if (j.contains("gold") && !j.at("gold").is_null()) {
            const ojson& g = j.at("gold");
            GoldLabel gold;
            gold.canonical_answer = require_string(g, "canonical_answer", where + " field 'gold'");
            if (g.contains("aliases")) {
                for (const auto& a : g.at("aliases")) {
                    gold.acceptable_aliases.push_back(a.get<std::string>());
                }
            }
            gold.match_mode = match_mode_from_string(
                g.value("match_mode", std::string("normalized")));
            task.gold = std::move(gold);
        }

        try {
            task.validate();
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
        if (!ids.insert(task.id).second) {
            throw ValidationError(where + ": duplicate task id '" + task.id + "'");
        }
        tasks.push_back(std::move(task));
    }
    return tasks;
}

std::vector<TaskInstance> load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open dataset: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str(), path);
}

void write_dataset(const std::string& path, const std::vector<TaskInstance>& tasks) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open dataset for writing: " + path);
    for (const auto& task : tasks) {
        ojson j{{"id", task.id}, {"kind", to_string(task.kind)}, {"query", task.query}};
        if (task.gold) {
            ojson aliases = ojson::array();
            for (const auto& a : task.gold->acceptable_aliases) aliases.push_back(a);
            j["gold"] = ojson{{"canonical_answer", task.gold->canonical_answer},
                              {"aliases", std::move(aliases)},
                              {"match_mode", to_string(task.gold->match_mode)}};
        }
        out << j.dump() << '\n';
    }
}

std::map<std::string, TaskInstance> index_by_id(const std::vector<TaskInstance>& tasks) {
    std::map<std::string, TaskInstance> index;
    for (const auto& t : tasks) index.emplace(t.id, t);
    return index;
}

}  // namespace prcot
