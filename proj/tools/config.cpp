#include "config.hpp"

#include <algorithm>

namespace infoflow::cli {

namespace {

const char *const kMetaKeys[] = {"command", "pipeline", "description"};

bool is_meta(const std::string &key)
{
    return std::find(std::begin(kMetaKeys), std::end(kMetaKeys), key) != std::end(kMetaKeys);
}

std::string scalar(const json &v, const std::string &key)
{
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number() || v.is_object()) return v.dump();
    throw Error("config key '" + key + "' must be a string, number, boolean, object or list of those");
}

const CLI::Option *find_option(const CLI::App &app, const std::string &name)
{
    for (const CLI::Option *o : app.get_options())
        if (o->check_name("--" + name) || (o->get_positional() && o->check_name(name))) return o;
    return nullptr;
}

}  // namespace

std::vector<ConfigStep> config_steps(const json &cfg)
{
    if (!cfg.is_object()) throw Error("config must be a JSON object");
    if (!cfg.contains("pipeline")) {
        if (!cfg.contains("command") || !cfg.at("command").is_string())
            throw Error("config needs a 'command' or a 'pipeline' list");
        return {ConfigStep{cfg.at("command").get<std::string>(), cfg, json::object()}};
    }
    const json &steps = cfg.at("pipeline");
    if (!steps.is_array() || steps.empty()) throw Error("'pipeline' must be a nonempty list");
    json shared = json::object();
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
        if (!is_meta(it.key())) shared[it.key()] = it.value();
    std::vector<ConfigStep> out;
    for (const json &s : steps) {
        if (!s.is_object() || !s.contains("command") || !s.at("command").is_string())
            throw Error("every step needs a 'command'");
        json inherited = json::object();
        for (auto it = shared.begin(); it != shared.end(); ++it)
            if (!s.contains(it.key())) inherited[it.key()] = it.value();
        out.push_back({s.at("command").get<std::string>(), s, inherited});
    }
    return out;
}

std::vector<std::string> config_args(const CLI::App &app, const CLI::App &cmd, const ConfigStep &step)
{
    std::vector<std::string> args, positional;
    auto add = [&](const std::string &raw_key, const json &value, bool strict) {
        if (is_meta(raw_key)) return;
        std::string key = raw_key;
        std::replace(key.begin(), key.end(), '_', '-');
        if (key == "config") throw Error("config files cannot include other config files");
        const CLI::Option *o = find_option(cmd, key);
        if (!o) o = find_option(app, key);
        if (!o) {
            if (strict) throw Error("config: '" + cmd.get_name() + "' has no option '" + raw_key + "'");
            return;
        }
        if (o->count() > 0) return;  // the command line wins
        const std::vector<json> values = value.is_array() ? value.get<std::vector<json>>() : std::vector<json>{value};
        if (o->get_positional()) {
            for (const json &v : values) positional.push_back(scalar(v, raw_key));
            return;
        }
        if (o->get_expected_min() == 0) {
            if (!value.is_boolean()) throw Error("config key '" + raw_key + "' is a flag and needs true or false");
            if (value.get<bool>()) args.push_back("--" + key);
            return;
        }
        for (const json &v : values) {
            args.push_back("--" + key);
            args.push_back(scalar(v, raw_key));
        }
    };
    for (auto it = step.own.begin(); it != step.own.end(); ++it) add(it.key(), it.value(), true);
    for (auto it = step.inherited.begin(); it != step.inherited.end(); ++it) add(it.key(), it.value(), false);
    if (!positional.empty()) {
        args.push_back("--");
        args.insert(args.end(), positional.begin(), positional.end());
    }
    return args;
}

}  // namespace infoflow::cli
