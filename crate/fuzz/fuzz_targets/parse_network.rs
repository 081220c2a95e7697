#![no_main]

use libfuzzer_sys::fuzz_target;

// Arbitrary bytes must never panic the parser, and anything it accepts must
// survive a serialize/reparse round trip unchanged.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(net) = caching_games::format::parse_network(text) else {
        return;
    };
    let json = caching_games::format::network_to_json(&net);
    let again = caching_games::format::parse_network(&json).expect("round trip reparse");
    assert_eq!(net, again, "round trip changed the network");
});
