// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace testing
{

/// Programs covering every grammar construct, used for round-trip checks.
inline const std::vector<std::string>& program_corpus()
{
    static const std::vector<std::string> kPrograms = {
        "",
        "object_set = scene()\n",
        "print(1)\n",
        R"(# Get object set in the scene
object_set = scene()

# Identify objects behind me
object_behind_set = relate_agent(object_set=object_set, relation="behind")

# Sort the objects behind me by distance
object_behind_by_distance = sort_by_distance(object_behind_set)

# Determine what object is directly behind me
category_behind_by_distance = [obj.category for obj in object_behind_by_distance][:3]
print(f"Objects directly behind me: {category_behind_by_distance}")
)",
        "chairs = filter(scene(), \"chair\")\nfor c in chairs:\n    print(c.category, c.xyz)\n",
        "x = 1\nif x > 0:\n    print(\"positive\")\nelse:\n    print(\"non-positive\")\n",
        "x = 5\nif x < 0:\n    print(\"a\")\nelif x == 0:\n    print(\"b\")\nelif x < 10:\n    print(\"c\")\nelse:\n    print(\"d\")\n",
        "tables = filter(scene(), \"table\") | filter(scene(), \"desk\")\nboth = tables & scene()\nprint(len(both))\n",
        "nums = [1, 2, 3, 4]\nprint(sum(nums), min(nums), max(nums), abs(-3), round(2.567, 2))\n",
        "nums = [1, 2, 3, 4, 5]\nprint(nums[1:3], nums[:2], nums[3:], nums[-1], nums[:])\n",
        "evens = [n for n in [1, 2, 3, 4, 5, 6] if n % 2 == 0]\nprint(evens)\n",
        "ok = not (1 > 2) and (3 >= 3 or False)\nprint(ok, None)\n",
        "s = \"a\" in [\"a\", \"b\"]\nt = \"c\" not in [\"a\", \"b\"]\nprint(s, t, 1 != 2, 2 <= 2)\n",
        "d = 7 / 2 - 3 * (1 + 1)\nprint(d, -d, +d)\n",
        "for obj in scene():\n    for other in relate(scene(), obj, \"on\"):\n        print(f\"{other.category} is on {obj.category}\")\n",
        "obj = list(scene())[0]\nprint(query_relation_agent(obj, candidate_relations=[\"left\", \"right\", \"o'clock\"]))\n",
        "a = list(scene())[0]\nb = list(scene())[1]\nprint(query_relation(a, b), query_relation(object=a, reference_object=b, candidate_relations=[\"front\"]))\n",
        "obj = list(scene())[0]\nprint(query_attribute(obj, \"lwh\"), query_attribute(object=obj, attribute_type=\"distance\"))\n",
        "total = 0\nfor n in [1, 2, 3]:\n    total += n\n    total *= 2\nprint(total)\n",
        "names = sorted(list(set([o.category for o in scene()])))\nprint(str(len(names)) + \" categories: \" + str(names))\n",
        "d = query_attribute(list(scene())[0], \"distance\")\nprint(f\"distance {d:.2f} m, twice {d * 2:.1f}\")\n",
        "msg = 'it\\'s \"quoted\"\\n\\ttabbed'\nprint(msg)\nprint(f\"{{literal}} {msg}\")\n",
        "nested = [[1, 2], [3, [4, 5]]]\nprint(nested[1][1][0], len(nested))\n",
        "x = 3\nif x > 1:\n    if x > 2:\n        print(\"big\")\n    else:\n        print(\"mid\")\nprint(\"done\")\n",
        "near = relate_agent(scene(), \"within reach\") | relate_agent(scene(), \"closest\")\nprint([o.category for o in sort_by_distance(near) if o.category != \"wall\"])\n",
    };
    return kPrograms;
}

} // namespace testing
