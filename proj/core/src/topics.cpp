#include "debatelab/topics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <string>

#include "debatelab/error.hpp"
#include "debatelab/json_io.hpp"

namespace debatelab {

bool is_safe_topic_id(std::string_view id) {
  if (id.empty() || id.size() > 128 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_' || c == '.';
  });
}

std::vector<Topic> parse_topics(std::istream& in) {
  std::vector<Topic> topics;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }))
      continue;
    Topic topic;
    try {
      topic = Json::parse(line).get<Topic>();
    } catch (const SchemaError& e) {
      throw SchemaError(line_no, e.what());
    } catch (const Json::exception& e) {
      throw SchemaError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (std::all_of(topic.text.begin(), topic.text.end(),
                    [](unsigned char c) { return std::isspace(c); }))
      throw SchemaError(line_no, "topic text is empty");
    if (!is_safe_topic_id(topic.id))
      throw SchemaError(line_no, "topic id '" + topic.id + "' is not a safe file name");
    if (!seen.insert(topic.id).second)
      throw SchemaError(line_no, "duplicate topic id '" + topic.id + "'");
    topics.push_back(std::move(topic));
  }
  return topics;
}

std::vector<Topic> load_topics(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open topic file " + path.string());
  return parse_topics(in);
}

}  // namespace debatelab
