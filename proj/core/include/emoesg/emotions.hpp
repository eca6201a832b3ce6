#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace emoesg {

/// The eight emotion categories scored throughout the pipeline, in the
/// canonical column order used by every output file.
enum class Emotion : std::size_t {
  happy = 0,
  sad,
  angry,
  fear,
  surprise,
  trust,
  disgust,
  anticipation,
};

inline constexpr std::size_t kEmotionCount = 8;

inline constexpr std::array<Emotion, kEmotionCount> kAllEmotions = {
    Emotion::happy, Emotion::sad,   Emotion::angry,   Emotion::fear,
    Emotion::surprise, Emotion::trust, Emotion::disgust, Emotion::anticipation,
};

/// Per-emotion value container indexed by Emotion.
template <typename T>
using EmotionArray = std::array<T, kEmotionCount>;

constexpr std::size_t index_of(Emotion e) { return static_cast<std::size_t>(e); }

/// Label used for the emotion word itself and for Retro column names.
std::string_view emotion_name(Emotion e);

/// NRC Emotion Lexicon spelling (joy, sadness, anger; the rest coincide).
std::string_view nrc_emotion_name(Emotion e);

/// Parses either spelling. Returns nullopt for labels outside the 8-set
/// (e.g. NRC's "positive"/"negative").
std::optional<Emotion> parse_emotion(std::string_view label);

enum class Polarity { positive, neutral, negative };

Polarity polarity_of(Emotion e);

std::string_view polarity_name(Polarity p);

}  // namespace emoesg
