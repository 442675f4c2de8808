/** Pure text operations for the authoring editor. */

export interface TextPatch {
  text: string;
  /** Caret position after applying the patch. */
  cursor: number;
}

/** Wrap the selection in `$...$`; with no selection, insert an empty pair
 * and leave the caret between the delimiters so typing lands in math mode. */
export function insertFormulaField(
  text: string,
  selectionStart: number,
  selectionEnd: number,
): TextPatch {
  const start = Math.max(0, Math.min(selectionStart, text.length));
  const end = Math.max(start, Math.min(selectionEnd, text.length));
  const selected = text.slice(start, end);
  const patched = `${text.slice(0, start)}$${selected}$${text.slice(end)}`;
  return { text: patched, cursor: start + 1 + selected.length };
}
