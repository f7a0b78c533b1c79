#pragma once

#include <filesystem>
#include <istream>
#include <vector>

#include "debatelab/model.hpp"

namespace debatelab {

/// Reads a topic file: one JSON object per line with fields
/// {id, text, source, contentiousness}; contentiousness defaults to
/// "unlabeled". Blank lines are skipped. Throws SchemaError naming the line
/// for malformed records, empty text, unsafe ids, or duplicate ids.
std::vector<Topic> parse_topics(std::istream& in);
std::vector<Topic> load_topics(const std::filesystem::path& path);

/// True when `id` can be used verbatim as a file name stem.
bool is_safe_topic_id(std::string_view id);

}  // namespace debatelab
