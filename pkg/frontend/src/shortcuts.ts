// Keyboard mapping for the review loop. Keystrokes typed into form
// controls are never treated as shortcuts.

export type ReviewAction =
  | "correct"
  | "incorrect"
  | "unsure"
  | "replay"
  | "toggle-speed";

const KEY_ACTIONS: Record<string, ReviewAction> = {
  y: "correct",
  n: "incorrect",
  u: "unsure",
  " ": "replay",
  s: "toggle-speed",
};

const TYPING_TAGS = new Set(["INPUT", "TEXTAREA", "SELECT"]);

export interface KeyContext {
  key: string;
  targetTag?: string;
  targetEditable?: boolean;
  modifier?: boolean;
}

export function actionForKey(ctx: KeyContext): ReviewAction | null {
  if (ctx.modifier) {
    return null;
  }
  if (ctx.targetTag && TYPING_TAGS.has(ctx.targetTag.toUpperCase())) {
    return null;
  }
  if (ctx.targetEditable) {
    return null;
  }
  return KEY_ACTIONS[ctx.key.toLowerCase()] ?? null;
}

export function contextOf(event: KeyboardEvent): KeyContext {
  const target = event.target as HTMLElement | null;
  return {
    key: event.key,
    targetTag: target?.tagName,
    targetEditable: target?.isContentEditable ?? false,
    modifier: event.ctrlKey || event.altKey || event.metaKey,
  };
}
