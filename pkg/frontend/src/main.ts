import { CaseClient } from "./api.js";
import { CaseQueueStore } from "./store.js";
import { ConsoleView } from "./view.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("server") ?? "http://127.0.0.1:8400";
const analystId = params.get("analyst") ?? "analyst-console";

const client = new CaseClient(baseUrl);
const store = new CaseQueueStore(client, analystId);
const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
new ConsoleView(root, store);
void store.start();
