#include "camforge/prompts.hpp"

#include <fstream>

#include "camforge/errors.hpp"

namespace camforge::drift {

const std::vector<std::string>& default_prompts() {
    static const std::vector<std::string> prompts = {
        // animals
        "a golden retriever sprinting across a meadow",
        "a flock of starlings wheeling over a lake",
        "a cat leaping between two rooftops at dusk",
        "a horse galloping along a foggy shoreline",
        "a hummingbird hovering beside a red flower",
        "a pod of dolphins surfacing near a sailboat",
        "a squirrel darting up an oak tree",
        "an eagle diving toward a river to catch a fish",
        // architecture
        "a cable car climbing past old city facades",
        "a drawbridge slowly opening for a barge",
        "rain streaking down the glass of a skyscraper",
        "a revolving door spinning in a marble lobby",
        "flags waving on a medieval castle tower",
        "an escalator rising through a sunlit atrium",
        "a ferris wheel turning beside a pier at night",
        "construction cranes swinging over a new stadium",
        // food
        "steam rising from a bowl of fresh ramen",
        "a chef tossing vegetables in a flaming wok",
        "espresso pouring into a white porcelain cup",
        "pancake batter spreading on a hot griddle",
        "a baker dusting flour over rising dough",
        "honey drizzling onto a stack of waffles",
        "popcorn bursting inside a glass popper",
        "a waiter carrying sizzling fajitas through a cafe",
        // humans
        "a dancer spinning under a single spotlight",
        "children chasing a kite across a beach",
        "a cyclist weaving through morning traffic",
        "a violinist playing in a busy subway station",
        "a climber pulling over a granite ledge",
        "a barista steaming milk behind the counter",
        "runners splashing through puddles in a park",
        "a painter sweeping a brush across a mural wall",
        // lifestyle
        "laundry fluttering on a line between houses",
        "a record spinning on a turntable in warm light",
        "a campfire crackling beside two tents",
        "a skateboard rolling down a quiet street",
        "pages of an open book turning in the wind",
        "a kettle steaming on a cast iron stove",
        "a dog walker crossing a rainy crosswalk",
        "candles flickering on a windowsill at dusk",
        // plants
        "cherry blossoms drifting onto a pond",
        "a field of sunflowers swaying in the breeze",
        "ferns unfurling in a misty rainforest",
        "autumn leaves spiraling down from a maple",
        "grass bending under a sweeping storm front",
        "a vine curling along a rusted iron fence",
        "dandelion seeds scattering over a hillside",
        "palm fronds rustling above a beach path",
        // scenery
        "waves breaking against a lighthouse at dawn",
        "clouds rolling over a jagged mountain ridge",
        "a waterfall plunging into a turquoise pool",
        "sand dunes shifting under a desert wind",
        "fog sliding through a pine valley at sunrise",
        "a glacier calving into a gray fjord",
        "lightning flashing over an open prairie",
        "a river braiding across a wide floodplain",
        // vehicles
        "a steam train crossing a stone viaduct",
        "a red biplane looping above an airfield",
        "a ferry cutting through harbor chop at dusk",
        "a motorcycle leaning through a mountain curve",
        "a tram gliding down a rain-slicked avenue",
        "a hot air balloon lifting off a misty field",
        "a tractor plowing long rows at golden hour",
        "a sailboat heeling in a brisk offshore wind",
    };
    return prompts;
}

std::vector<std::string> load_prompts(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read prompts: " + path);
    std::vector<std::string> prompts;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (!line.empty()) prompts.push_back(line);
    }
    return prompts;
}

}  // namespace camforge::drift
