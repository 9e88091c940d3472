#pragma once

#include <optional>
#include <string>

namespace hallclean {

/// One ASR output as read from a corpus file.
struct TranscriptRecord {
  std::string id;
  std::string text;  // raw ASR output, may be empty
  std::optional<std::string> reference;

  // optional pairing/augmentation metadata
  std::optional<std::string> category;
  std::optional<double> duration_s;
  std::optional<std::string> augment_position;  // before|after|both
  std::optional<std::string> overlap;           // NO|OL
  std::optional<std::string> paired_original_id;
};

}  // namespace hallclean
