import { GatewayApi } from "./api.js";
import { mountApp } from "./ui.js";

const params = new URLSearchParams(window.location.search);
const gateway = params.get("gateway") ?? "http://127.0.0.1:8080";

mountApp(document.getElementById("root")!, new GatewayApi(gateway));
