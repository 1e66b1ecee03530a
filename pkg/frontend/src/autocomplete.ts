// Correction-field helpers: suggest vocabulary words for a prefix and
// validate that a correction is exactly a served word.

export function normalizeWord(raw: string): string {
  return raw.trim().toLowerCase();
}

export function suggest(
  vocabulary: readonly string[],
  prefix: string,
  limit = 8,
): string[] {
  const p = normalizeWord(prefix);
  if (!p) {
    return [];
  }
  const starts: string[] = [];
  const contains: string[] = [];
  for (const word of vocabulary) {
    if (word.startsWith(p)) {
      starts.push(word);
    } else if (word.includes(p)) {
      contains.push(word);
    }
  }
  return [...starts, ...contains].slice(0, limit);
}

export function isVocabularyWord(
  vocabulary: readonly string[],
  raw: string,
): boolean {
  return vocabulary.includes(normalizeWord(raw));
}
