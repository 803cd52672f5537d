import { ServiceClient } from "./api";
import { AnnotationFlow } from "./state";
import { mount } from "./view";

// ?api=http://host:8799&project=<id>; defaults match `divergebench serve`
const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://127.0.0.1:8799";
const projectId = params.get("project") ?? "default";

const flow = new AnnotationFlow(
  (token) => new ServiceClient(baseUrl, projectId, token),
);

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");
mount(root, flow);
