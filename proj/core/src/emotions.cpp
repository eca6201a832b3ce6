#include "emoesg/emotions.hpp"

namespace emoesg {

namespace {

constexpr std::array<std::string_view, kEmotionCount> kNames = {
    "happy", "sad", "angry", "fear", "surprise", "trust", "disgust", "anticipation"};

constexpr std::array<std::string_view, kEmotionCount> kNrcNames = {
    "joy", "sadness", "anger", "fear", "surprise", "trust", "disgust", "anticipation"};

}  // namespace

std::string_view emotion_name(Emotion e) { return kNames[index_of(e)]; }

std::string_view nrc_emotion_name(Emotion e) { return kNrcNames[index_of(e)]; }

std::optional<Emotion> parse_emotion(std::string_view label) {
  for (Emotion e : kAllEmotions) {
    if (label == kNames[index_of(e)] || label == kNrcNames[index_of(e)]) return e;
  }
  return std::nullopt;
}

Polarity polarity_of(Emotion e) {
  switch (e) {
    case Emotion::trust:
    case Emotion::anticipation:
    case Emotion::happy:
      return Polarity::positive;
    case Emotion::surprise:
      return Polarity::neutral;
    case Emotion::disgust:
    case Emotion::angry:
    case Emotion::fear:
    case Emotion::sad:
      return Polarity::negative;
  }
  return Polarity::neutral;
}

std::string_view polarity_name(Polarity p) {
  switch (p) {
    case Polarity::positive:
      return "positive";
    case Polarity::neutral:
      return "neutral";
    case Polarity::negative:
      return "negative";
  }
  return "neutral";
}

}  // namespace emoesg
