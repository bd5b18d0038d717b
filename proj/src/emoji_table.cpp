// Generated from data/emoji_aliases.tsv; keep both in sync.
#include "emoji_table.hpp"

namespace mission::detail {

const std::array<EmojiAlias, kEmojiAliasCount> kEmojiAliases = {{
    {0x203C, "bangbang"},
    {0x2049, "interrobang"},
    {0x2122, "tm"},
    {0x231A, "watch"},
    {0x231B, "hourglass"},
    {0x23F0, "alarm_clock"},
    {0x2600, "sunny"},
    {0x2601, "cloud"},
    {0x2614, "umbrella"},
    {0x2615, "coffee"},
    {0x261D, "point_up"},
    {0x2620, "skull_and_crossbones"},
    {0x2622, "radioactive"},
    {0x262E, "peace_symbol"},
    {0x2639, "frowning_face"},
    {0x263A, "relaxed"},
    {0x2660, "spades"},
    {0x2663, "clubs"},
    {0x2665, "hearts"},
    {0x2666, "diamonds"},
    {0x267B, "recycle"},
    {0x2693, "anchor"},
    {0x2696, "balance_scale"},
    {0x26A0, "warning"},
    {0x26A1, "zap"},
    {0x26BD, "soccer"},
    {0x26BE, "baseball"},
    {0x26C4, "snowman"},
    {0x26EA, "church"},
    {0x2702, "scissors"},
    {0x2705, "white_check_mark"},
    {0x2708, "airplane"},
    {0x2709, "email"},
    {0x270A, "fist"},
    {0x270B, "hand"},
    {0x270C, "v"},
    {0x270F, "pencil2"},
    {0x2714, "heavy_check_mark"},
    {0x2716, "heavy_multiplication_x"},
    {0x2728, "sparkles"},
    {0x2744, "snowflake"},
    {0x274C, "x"},
    {0x2753, "question"},
    {0x2757, "exclamation"},
    {0x2764, "heart"},
    {0x27A1, "arrow_right"},
    {0x2B05, "arrow_left"},
    {0x2B06, "arrow_up"},
    {0x2B07, "arrow_down"},
    {0x2B50, "star"},
    {0x1F308, "rainbow"},
    {0x1F30D, "earth_africa"},
    {0x1F30E, "earth_americas"},
    {0x1F30F, "earth_asia"},
    {0x1F319, "crescent_moon"},
    {0x1F31E, "sun_with_face"},
    {0x1F31F, "star2"},
    {0x1F334, "palm_tree"},
    {0x1F338, "cherry_blossom"},
    {0x1F339, "rose"},
    {0x1F33B, "sunflower"},
    {0x1F340, "four_leaf_clover"},
    {0x1F354, "hamburger"},
    {0x1F355, "pizza"},
    {0x1F377, "wine_glass"},
    {0x1F378, "cocktail"},
    {0x1F37A, "beer"},
    {0x1F37B, "beers"},
    {0x1F381, "gift"},
    {0x1F382, "birthday"},
    {0x1F383, "jack_o_lantern"},
    {0x1F384, "christmas_tree"},
    {0x1F388, "balloon"},
    {0x1F389, "tada"},
    {0x1F3A4, "microphone"},
    {0x1F3A7, "headphones"},
    {0x1F3AC, "clapper"},
    {0x1F3AE, "video_game"},
    {0x1F3B5, "musical_note"},
    {0x1F3B6, "notes"},
    {0x1F3BE, "tennis"},
    {0x1F3C0, "basketball"},
    {0x1F3C6, "trophy"},
    {0x1F3C8, "football"},
    {0x1F3E0, "house"},
    {0x1F3E5, "hospital"},
    {0x1F40D, "snake"},
    {0x1F415, "dog2"},
    {0x1F431, "cat"},
    {0x1F436, "dog"},
    {0x1F437, "pig"},
    {0x1F440, "eyes"},
    {0x1F441, "eye"},
    {0x1F442, "ear"},
    {0x1F443, "nose"},
    {0x1F444, "lips"},
    {0x1F445, "tongue"},
    {0x1F446, "point_up_2"},
    {0x1F447, "point_down"},
    {0x1F448, "point_left"},
    {0x1F449, "point_right"},
    {0x1F44A, "fist_oncoming"},
    {0x1F44B, "wave"},
    {0x1F44C, "ok_hand"},
    {0x1F44D, "thumbsup"},
    {0x1F44E, "thumbsdown"},
    {0x1F44F, "clap"},
    {0x1F450, "open_hands"},
    {0x1F47B, "ghost"},
    {0x1F47D, "alien"},
    {0x1F47F, "imp"},
    {0x1F480, "skull"},
    {0x1F489, "syringe"},
    {0x1F48A, "pill"},
    {0x1F494, "broken_heart"},
    {0x1F495, "two_hearts"},
    {0x1F496, "sparkling_heart"},
    {0x1F497, "heartpulse"},
    {0x1F498, "cupid"},
    {0x1F499, "blue_heart"},
    {0x1F49A, "green_heart"},
    {0x1F49B, "yellow_heart"},
    {0x1F49C, "purple_heart"},
    {0x1F49D, "gift_heart"},
    {0x1F49E, "revolving_hearts"},
    {0x1F49F, "heart_decoration"},
    {0x1F4A1, "bulb"},
    {0x1F4A2, "anger"},
    {0x1F4A4, "zzz"},
    {0x1F4A5, "boom"},
    {0x1F4A6, "sweat_drops"},
    {0x1F4A8, "dash"},
    {0x1F4A9, "hankey"},
    {0x1F4AA, "muscle"},
    {0x1F4AB, "dizzy"},
    {0x1F4AC, "speech_balloon"},
    {0x1F4AF, "100"},
    {0x1F4B0, "moneybag"},
    {0x1F4B8, "money_with_wings"},
    {0x1F4BB, "computer"},
    {0x1F4C8, "chart_with_upwards_trend"},
    {0x1F4C9, "chart_with_downwards_trend"},
    {0x1F4CA, "bar_chart"},
    {0x1F4CC, "pushpin"},
    {0x1F4CD, "round_pushpin"},
    {0x1F4DD, "memo"},
    {0x1F4E2, "loudspeaker"},
    {0x1F4E3, "mega"},
    {0x1F4F0, "newspaper"},
    {0x1F4F1, "iphone"},
    {0x1F4F7, "camera"},
    {0x1F4FA, "tv"},
    {0x1F4FB, "radio"},
    {0x1F507, "mute"},
    {0x1F50A, "loud_sound"},
    {0x1F50D, "mag"},
    {0x1F512, "lock"},
    {0x1F513, "unlock"},
    {0x1F514, "bell"},
    {0x1F517, "link"},
    {0x1F525, "fire"},
    {0x1F52B, "gun"},
    {0x1F534, "red_circle"},
    {0x1F535, "large_blue_circle"},
    {0x1F5A4, "black_heart"},
    {0x1F5E3, "speaking_head"},
    {0x1F5F3, "ballot_box"},
    {0x1F600, "grinning"},
    {0x1F601, "grin"},
    {0x1F602, "joy"},
    {0x1F603, "smiley"},
    {0x1F604, "smile"},
    {0x1F605, "sweat_smile"},
    {0x1F606, "laughing"},
    {0x1F607, "innocent"},
    {0x1F608, "smiling_imp"},
    {0x1F609, "wink"},
    {0x1F60A, "blush"},
    {0x1F60B, "yum"},
    {0x1F60C, "relieved"},
    {0x1F60D, "heart_eyes"},
    {0x1F60E, "sunglasses"},
    {0x1F60F, "smirk"},
    {0x1F610, "neutral_face"},
    {0x1F611, "expressionless"},
    {0x1F612, "unamused"},
    {0x1F613, "sweat"},
    {0x1F614, "pensive"},
    {0x1F615, "confused"},
    {0x1F616, "confounded"},
    {0x1F617, "kissing"},
    {0x1F618, "kissing_heart"},
    {0x1F619, "kissing_smiling_eyes"},
    {0x1F61A, "kissing_closed_eyes"},
    {0x1F61B, "stuck_out_tongue"},
    {0x1F61C, "stuck_out_tongue_winking_eye"},
    {0x1F61D, "stuck_out_tongue_closed_eyes"},
    {0x1F61E, "disappointed"},
    {0x1F61F, "worried"},
    {0x1F620, "angry"},
    {0x1F621, "rage"},
    {0x1F622, "cry"},
    {0x1F623, "persevere"},
    {0x1F624, "triumph"},
    {0x1F625, "disappointed_relieved"},
    {0x1F626, "frowning"},
    {0x1F627, "anguished"},
    {0x1F628, "fearful"},
    {0x1F629, "weary"},
    {0x1F62A, "sleepy"},
    {0x1F62B, "tired_face"},
    {0x1F62C, "grimacing"},
    {0x1F62D, "sob"},
    {0x1F62E, "open_mouth"},
    {0x1F62F, "hushed"},
    {0x1F630, "cold_sweat"},
    {0x1F631, "scream"},
    {0x1F632, "astonished"},
    {0x1F633, "flushed"},
    {0x1F634, "sleeping"},
    {0x1F635, "dizzy_face"},
    {0x1F636, "no_mouth"},
    {0x1F637, "mask"},
    {0x1F638, "smile_cat"},
    {0x1F639, "joy_cat"},
    {0x1F63A, "smiley_cat"},
    {0x1F63B, "heart_eyes_cat"},
    {0x1F63C, "smirk_cat"},
    {0x1F63D, "kissing_cat"},
    {0x1F63E, "pouting_cat"},
    {0x1F63F, "crying_cat_face"},
    {0x1F640, "scream_cat"},
    {0x1F641, "slightly_frowning_face"},
    {0x1F642, "slightly_smiling_face"},
    {0x1F643, "upside_down_face"},
    {0x1F644, "roll_eyes"},
    {0x1F645, "no_good"},
    {0x1F646, "ok_woman"},
    {0x1F647, "bow"},
    {0x1F648, "see_no_evil"},
    {0x1F649, "hear_no_evil"},
    {0x1F64A, "speak_no_evil"},
    {0x1F64B, "raising_hand"},
    {0x1F64C, "raised_hands"},
    {0x1F64D, "person_frowning"},
    {0x1F64E, "person_with_pouting_face"},
    {0x1F64F, "pray"},
    {0x1F680, "rocket"},
    {0x1F697, "car"},
    {0x1F6A8, "rotating_light"},
    {0x1F6AB, "no_entry_sign"},
    {0x1F910, "zipper_mouth_face"},
    {0x1F911, "money_mouth_face"},
    {0x1F912, "face_with_thermometer"},
    {0x1F913, "nerd_face"},
    {0x1F914, "thinking"},
    {0x1F915, "face_with_head_bandage"},
    {0x1F916, "robot"},
    {0x1F917, "hugs"},
    {0x1F918, "metal"},
    {0x1F919, "call_me_hand"},
    {0x1F91A, "raised_back_of_hand"},
    {0x1F91B, "fist_left"},
    {0x1F91C, "fist_right"},
    {0x1F91D, "handshake"},
    {0x1F91E, "crossed_fingers"},
    {0x1F920, "cowboy_hat_face"},
    {0x1F921, "clown_face"},
    {0x1F922, "nauseated_face"},
    {0x1F923, "rofl"},
    {0x1F924, "drooling_face"},
    {0x1F925, "lying_face"},
    {0x1F926, "facepalm"},
    {0x1F927, "sneezing_face"},
    {0x1F928, "raised_eyebrow"},
    {0x1F929, "star_struck"},
    {0x1F92A, "zany_face"},
    {0x1F92B, "shushing_face"},
    {0x1F92C, "cursing_face"},
    {0x1F92D, "hand_over_mouth"},
    {0x1F92E, "vomiting_face"},
    {0x1F92F, "exploding_head"},
    {0x1F937, "shrug"},
    {0x1F970, "smiling_face_with_three_hearts"},
    {0x1F971, "yawning_face"},
    {0x1F973, "partying_face"},
    {0x1F974, "woozy_face"},
    {0x1F975, "hot_face"},
    {0x1F976, "cold_face"},
    {0x1F97A, "pleading_face"},
    {0x1F984, "unicorn"},
    {0x1F98B, "butterfly"},
    {0x1F9A0, "microbe"},
    {0x1F9E1, "orange_heart"},
}};

}  // namespace mission::detail
