export const INSTRUCTIONS_TITLE = "How to judge";

export const INSTRUCTIONS: string[] = [
  "Each screen shows one English sentence, its French reference translation, " +
    "and several machine translations of the same sentence, labeled A, B, C. " +
    "The labels are shuffled per sentence: there is no way to tell which " +
    "engine produced which output, and you should not try to guess.",
  "Read the question at the top, then look at the emphasized part of the " +
    "reference. That is the exact construction the question is about. Judge " +
    "each output on that construction only; ignore unrelated mistakes " +
    "elsewhere in the sentence.",
  "Answer Yes when the output gets the emphasized construction right, and " +
    "No when it attempts the construction but gets it wrong.",
  "Answer Not applicable only when the output sidesteps the construction " +
    "altogether, say by rewording the sentence so the question cannot be " +
    "answered either way. How good or bad the rest of the translation is " +
    "plays no role in that choice, which is why Not applicable asks you to " +
    "confirm before it is recorded.",
  "Every output of the current sentence must be judged before the next one " +
    "appears. You can change any answer while the sentence is still on " +
    "screen; the last answer per output counts.",
  "Keyboard: arrow keys move between outputs, Y = yes, N = no, " +
    "A = not applicable (then Enter to confirm or Escape to cancel).",
];
