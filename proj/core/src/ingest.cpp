#include <istream>
#include <iterator>

#include "arground/error.hpp"
#include "arground/splitter.hpp"
#include "arground/text.hpp"
#include "json.hpp"

namespace arground {

namespace {

using Json = nlohmann::json;

[[noreturn]] void layout_error(const std::string& record, const std::string& why) {
  throw Error(ErrorCode::IngestError, record + ": " + why, record);
}

const Json& require(const Json& j, const char* field, const std::string& record) {
  auto it = j.find(field);
  if (it == j.end()) layout_error(record, std::string("missing '") + field + "'");
  return *it;
}

std::string require_string(const Json& j, const char* field, const std::string& record) {
  const Json& v = require(j, field, record);
  if (!v.is_string()) layout_error(record, std::string("'") + field + "' must be a string");
  return v.get<std::string>();
}

const Json& require_array(const Json& j, const char* field, const std::string& record) {
  const Json& v = require(j, field, record);
  if (!v.is_array()) layout_error(record, std::string("'") + field + "' must be a list");
  return v;
}

std::string scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array() && !v.empty()) return scalar_text(v.front());
  if (v.is_null()) return {};
  return v.dump();
}

// "Restaurants_1" -> "restaurants"
std::string domain_of_service(const std::string& service) {
  std::string base = service;
  const auto underscore = base.rfind('_');
  if (underscore != std::string::npos && underscore + 1 < base.size() &&
      base.find_first_not_of("0123456789", underscore + 1) == std::string::npos) {
    base = base.substr(0, underscore);
  }
  return to_lower_ascii(base);
}

void add_schema(IngestResult& out, ApiSchema schema, const std::string& record) {
  try {
    schema = normalize_schema(std::move(schema));
  } catch (const Error& e) {
    layout_error(record, e.what());
  }
  const std::string name = schema.api_name;
  if (!out.catalog.emplace(name, std::move(schema)).second) {
    layout_error(record, "api '" + name + "' appears twice");
  }
}

bool gold_fits_schema(const ArgumentMap& gold, const ApiSchema& schema) {
  for (const auto& [key, value] : gold) {
    if (schema.find_slot(key) == nullptr) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// SGD

void ingest_sgd(const Json& doc, IngestResult& out) {
  const Json& services = require_array(doc, "schema", "sgd dump");
  for (std::size_t s = 0; s < services.size(); ++s) {
    const std::string record = "schema[" + std::to_string(s) + "]";
    const Json& service = services[s];
    if (!service.is_object()) layout_error(record, "service must be an object");
    ApiSchema schema;
    schema.api_name = require_string(service, "service_name", record);
    schema.description = service.value("description", std::string());

    std::set<std::string> required;
    if (auto it = service.find("intents"); it != service.end() && it->is_array()) {
      for (const auto& intent : *it) {
        if (auto r = intent.find("required_slots"); r != intent.end() && r->is_array()) {
          for (const auto& name : *r) {
            if (name.is_string()) required.insert(name.get<std::string>());
          }
        }
      }
    }
    for (const auto& slot_json : require_array(service, "slots", record)) {
      if (!slot_json.is_object()) layout_error(record, "slot must be an object");
      SlotSpec slot;
      slot.name = require_string(slot_json, "name", record);
      slot.description = slot_json.value("description", std::string());
      slot.required = required.count(slot.name) > 0;
      const bool categorical = slot_json.value("is_categorical", false);
      if (categorical) {
        std::set<std::string> seen;
        if (auto pv = slot_json.find("possible_values"); pv != slot_json.end() && pv->is_array()) {
          for (const auto& v : *pv) {
            std::string value = canonicalize_value(scalar_text(v));
            if (!value.empty() && seen.insert(value).second) slot.allowed_values.push_back(value);
          }
        }
      }
      slot.kind = slot.allowed_values.empty() ? SlotKind::FreeText : SlotKind::Categorical;
      schema.slots.push_back(std::move(slot));
    }
    add_schema(out, std::move(schema), record);
  }

  const Json& dialogues = require_array(doc, "dialogues", "sgd dump");
  for (std::size_t di = 0; di < dialogues.size(); ++di) {
    const std::string record = "dialogues[" + std::to_string(di) + "]";
    const Json& dj = dialogues[di];
    if (!dj.is_object()) layout_error(record, "dialogue must be an object");
    const std::string dialogue_id = require_string(dj, "dialogue_id", record);
    const Json& turns = require_array(dj, "turns", record);

    std::vector<DialogueTurn> history;
    for (std::size_t t = 0; t < turns.size(); ++t) {
      const std::string turn_record = record + ".turns[" + std::to_string(t) + "]";
      const Json& tj = turns[t];
      const std::string speaker = to_lower_ascii(require_string(tj, "speaker", turn_record));
      const std::string utterance = require_string(tj, "utterance", turn_record);

      if (auto frames = tj.find("frames"); frames != tj.end() && frames->is_array()) {
        for (const auto& frame : *frames) {
          auto call = frame.find("service_call");
          if (call == frame.end() || !call->is_object()) continue;
          const std::string id = dialogue_id + ":" + std::to_string(t);
          const std::string service = require_string(frame, "service", turn_record);
          auto params = call->find("parameters");
          if (params == call->end() || !params->is_object() || params->empty()) {
            out.warnings.push_back("skipped " + id + ": service call has no slot annotations");
            continue;
          }
          auto schema = out.catalog.find(service);
          if (schema == out.catalog.end()) {
            layout_error(turn_record, "service '" + service + "' is not in the schema");
          }
          if (history.empty()) {
            out.warnings.push_back("skipped " + id + ": service call has no preceding history");
            continue;
          }
          Dialogue d;
          d.id = id;
          d.domain = domain_of_service(service);
          d.target_api = service;
          d.turns = history;
          try {
            for (const auto& [key, value] : params->items()) {
              const std::string v = scalar_text(value);
              if (!trim(v).empty()) d.gold_arguments.add(key, v);
            }
          } catch (const Error& e) {
            out.warnings.push_back("skipped " + id + ": " + e.what());
            continue;
          }
          if (d.gold_arguments.empty() || !gold_fits_schema(d.gold_arguments, schema->second)) {
            out.warnings.push_back("skipped " + id + ": call arguments do not match the schema");
            continue;
          }
          out.dialogues.push_back(std::move(d));
        }
      }

      if (!trim(utterance).empty()) {
        history.push_back({speaker == "user" ? Speaker::User : Speaker::Agent, utterance});
      }
    }
  }
}

// ---------------------------------------------------------------------------
// STAR

std::vector<std::string> string_list(const Json& j, const char* field, const std::string& record) {
  std::vector<std::string> out;
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return out;
  if (!it->is_array()) layout_error(record, std::string("'") + field + "' must be a list");
  for (const auto& v : *it) {
    if (!v.is_string()) layout_error(record, std::string("'") + field + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

void ingest_star(const Json& doc, IngestResult& out) {
  const Json& apis = require_array(doc, "apis", "star dump");
  for (std::size_t a = 0; a < apis.size(); ++a) {
    const std::string record = "apis[" + std::to_string(a) + "]";
    const Json& api = apis[a];
    if (!api.is_object()) layout_error(record, "api spec must be an object");
    ApiSchema schema;
    schema.api_name = require_string(api, "name", record);
    schema.description = api.value("description", std::string());
    std::map<std::string, std::vector<std::string>> choices;
    if (auto it = api.find("choices"); it != api.end()) {
      if (!it->is_object()) layout_error(record, "'choices' must be an object");
      for (const auto& [slot, values] : it->items()) {
        for (const auto& v : values) choices[slot].push_back(scalar_text(v));
      }
    }
    auto add_slots = [&](const std::vector<std::string>& names, bool required) {
      for (const auto& name : names) {
        SlotSpec slot;
        slot.name = name;
        slot.description = name;
        slot.required = required;
        if (auto c = choices.find(name); c != choices.end() && !c->second.empty()) {
          slot.kind = SlotKind::Categorical;
          std::set<std::string> seen;
          for (const auto& v : c->second) {
            std::string value = canonicalize_value(v);
            if (!value.empty() && seen.insert(value).second) slot.allowed_values.push_back(value);
          }
        }
        schema.slots.push_back(std::move(slot));
      }
    };
    add_slots(string_list(api, "required", record), true);
    add_slots(string_list(api, "optional", record), false);
    add_slots(string_list(api, "input", record), false);
    add_schema(out, std::move(schema), record);
  }

  const Json& dialogues = require_array(doc, "dialogues", "star dump");
  for (std::size_t di = 0; di < dialogues.size(); ++di) {
    const std::string record = "dialogues[" + std::to_string(di) + "]";
    const Json& dj = dialogues[di];
    if (!dj.is_object()) layout_error(record, "dialogue must be an object");
    const std::string dialogue_id = scalar_text(require(dj, "DialogueID", record));
    std::string domain;
    if (auto sc = dj.find("Scenario"); sc != dj.end() && sc->is_object()) {
      if (auto dom = sc->find("Domains"); dom != sc->end() && dom->is_array() && !dom->empty()) {
        domain = to_lower_ascii(scalar_text(dom->front()));
      }
    }
    const Json& events = require_array(dj, "Events", record);

    std::vector<DialogueTurn> history;
    for (std::size_t e = 0; e < events.size(); ++e) {
      const std::string event_record = record + ".Events[" + std::to_string(e) + "]";
      const Json& ev = events[e];
      const std::string agent = to_lower_ascii(require_string(ev, "Agent", event_record));
      const std::string action = to_lower_ascii(require_string(ev, "Action", event_record));
      if (action == "utter") {
        const std::string text = ev.value("Text", std::string());
        if (!trim(text).empty()) {
          history.push_back({agent == "user" ? Speaker::User : Speaker::Agent, text});
        }
        continue;
      }
      if (action != "query") continue;

      const std::string id = "star-" + dialogue_id + "-" + std::to_string(e);
      const std::string api_name = require_string(ev, "API", event_record);
      auto schema = out.catalog.find(api_name);
      if (schema == out.catalog.end()) {
        layout_error(event_record, "api '" + api_name + "' has no API definition");
      }
      auto constraints = ev.find("Constraints");
      if (constraints == ev.end() || !constraints->is_array() || constraints->empty()) {
        out.warnings.push_back("skipped " + id + ": query has no constraints");
        continue;
      }
      if (history.empty()) {
        out.warnings.push_back("skipped " + id + ": query has no preceding history");
        continue;
      }
      Dialogue d;
      d.id = id;
      d.domain = domain.empty() ? domain_of_service(api_name) : domain;
      d.target_api = api_name;
      d.turns = history;
      try {
        for (const auto& c : *constraints) {
          if (!c.is_object()) layout_error(event_record, "constraint must be an object");
          for (const auto& [key, value] : c.items()) {
            const std::string v = scalar_text(value);
            if (!trim(v).empty() && !d.gold_arguments.contains(canonicalize_key(key))) {
              d.gold_arguments.add(key, v);
            }
          }
        }
      } catch (const Error& err) {
        if (err.code() == ErrorCode::IngestError) throw;
        out.warnings.push_back("skipped " + id + ": " + err.what());
        continue;
      }
      if (d.gold_arguments.empty() || !gold_fits_schema(d.gold_arguments, schema->second)) {
        out.warnings.push_back("skipped " + id + ": constraints do not match the schema");
        continue;
      }
      out.dialogues.push_back(std::move(d));
    }
  }
}

}  // namespace

IngestResult ingest_external(std::istream& dump, DumpFormat format) {
  const std::string text((std::istreambuf_iterator<char>(dump)), std::istreambuf_iterator<char>());
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::IngestError, std::string("dump is not JSON: ") + e.what(), "dump");
  }
  if (!doc.is_object()) layout_error("dump", "top level must be an object");
  IngestResult out;
  try {
    if (format == DumpFormat::Sgd) {
      ingest_sgd(doc, out);
    } else {
      ingest_star(doc, out);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::IngestError, std::string("unexpected layout: ") + e.what(), "dump");
  }
  return out;
}

}  // namespace arground
