// Command rejections surface as transient toasts, never modal dialogs.

export function showToast(text: string, ms = 3500): void {
  const slot = document.getElementById("toast-slot");
  if (!slot) return;
  const node = document.createElement("div");
  node.className = "toast";
  node.textContent = text;
  slot.appendChild(node);
  setTimeout(() => node.remove(), ms);
}

export function guarded(promise: Promise<unknown>): void {
  promise.catch((err) => showToast(String(err.message ?? err)));
}
